#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "egonoise/framing.hpp"

namespace egonoise::signal {

struct Waveform {
  std::vector<double> samples;  // amplitudes, nominally in [-1, 1]
  int sample_rate_hz = 16000;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  // Rejects non-positive sample rates and non-finite samples.
  void validate() const;
};

enum class MotorState : std::uint8_t { Off = 0, On = 1 };

// One entry per analysis frame of the paired waveform.
using MotorStateTrack = std::vector<MotorState>;

enum class NoiseKind { FanOnly, FanPlusMovement };

struct MixSpec {
  double snr_db = 10.0;
  NoiseKind noise_kind = NoiseKind::FanOnly;
  std::uint64_t seed = 0;
};

// Synthetic stand-in for a phonetically labeled corpus: a fixed inventory
// of 10 classes, each with a distinct harmonic envelope and noise band.
inline constexpr int kNumPhonemes = 10;

struct UtteranceSpec {
  std::vector<int> phonemes;      // ids in [0, kNumPhonemes)
  std::vector<int> durations_ms;  // one per phoneme, all > 0
  std::uint64_t seed = 0;
};

struct SynthSpeech {
  Waveform wave;
  std::vector<int> frame_labels;  // one phoneme id per analysis frame
};

// Deterministic given (spec, framing). Waveform length is the sum of the
// segment durations; labels follow the analysis frame grid (a frame is
// labeled by the segment containing its center sample).
SynthSpeech synth_speech(const UtteranceSpec& spec, const FramingParams& framing);

struct MovementParams {
  double burst_rate_hz = 1.5;  // mean bursts per second (Poisson draw)
  int burst_ms_min = 300;
  int burst_ms_max = 700;
  double burst_gain = 1.0;
};

struct EgoNoise {
  Waveform wave;
  MotorStateTrack motor;  // per analysis frame; FanOnly => all Off
  std::vector<std::pair<std::size_t, std::size_t>> bursts;  // sample ranges [begin, end)
};

// Fan bed is a stationary broadband hum; movement adds amplitude-modulated
// harmonic chirps at random positions. A frame is marked On when at least
// half of its window overlaps the union of burst intervals. The fan bed is
// seeded independently of the bursts, so a zero-burst movement draw is
// bit-identical to the FanOnly signal for the same seed.
EgoNoise synth_ego_noise(NoiseKind kind, int duration_ms, std::uint64_t seed,
                         const FramingParams& framing,
                         const MovementParams& movement = {});

// Exposed for tests: the >= 50% window-overlap rule applied to burst ranges.
MotorStateTrack motor_track_from_bursts(
    std::size_t n_frames,
    const std::vector<std::pair<std::size_t, std::size_t>>& bursts,
    const FramingParams& framing);

struct MixResult {
  Waveform mixture;            // clipped to [-1, 1]
  double gain = 0.0;           // noise gain g applied before clipping
  std::size_t clipped = 0;     // samples clipped (warned, not an error)
};

// mixture = clean + g * noise with g = sqrt(Pc / (Pn * 10^(snr/10))),
// powers taken as mean squared amplitude over the clean-signal support.
// Noise must be at least as long as the clean signal; it is consumed from
// offset 0, or from a seeded random offset when offset_seed is given.
MixResult mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db,
                     std::optional<std::uint64_t> offset_seed = std::nullopt);

// Mean squared amplitude over the first n samples.
double mean_square(const std::vector<double>& samples, std::size_t n);

// CSV with header "frame,motor_on", one line per frame.
void write_motor_track(const std::string& path, const MotorStateTrack& track);
MotorStateTrack read_motor_track(const std::string& path);

}  // namespace egonoise::signal
