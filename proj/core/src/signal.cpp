// Synthetic speech, ego-noise synthesis and SNR-exact mixing.

#include "egonoise/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "egonoise/log.hpp"
#include "egonoise/rng.hpp"

namespace egonoise::signal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PhonemeVoice {
  double f0;          // fundamental, Hz
  double formant1;    // harmonic envelope peaks, Hz
  double formant2;
  double noise_lo;    // noise band, Hz
  double noise_hi;
  double noise_gain;  // relative to the harmonic part
};

// Fixed inventory: envelopes sweep upward with the class id, alternating
// between harmonic-dominant and noise-dominant classes so the confusion
// structure is not trivial.
PhonemeVoice voice_for(int phoneme) {
  PhonemeVoice v;
  v.f0 = 100.0 + 14.0 * phoneme;
  v.formant1 = 320.0 + 210.0 * phoneme;
  v.formant2 = 1000.0 + 500.0 * phoneme;
  const double center = 1300.0 + 480.0 * phoneme;
  v.noise_lo = center - 260.0;
  v.noise_hi = center + 260.0;
  v.noise_gain = (phoneme % 2 == 0) ? 0.35 : 0.95;
  return v;
}

double envelope(double freq, const PhonemeVoice& v) {
  const double d1 = (freq - v.formant1) / 180.0;
  const double d2 = (freq - v.formant2) / 260.0;
  return std::exp(-0.5 * d1 * d1) + 0.8 * std::exp(-0.5 * d2 * d2);
}

void apply_edge_ramp(std::vector<double>& seg, std::size_t ramp) {
  ramp = std::min(ramp, seg.size() / 2);
  for (std::size_t i = 0; i < ramp; ++i) {
    const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 1) / (ramp + 1));
    seg[i] *= w;
    seg[seg.size() - 1 - i] *= w;
  }
}

double rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double s : x) acc += s * s;
  return std::sqrt(acc / x.size());
}

std::vector<double> synth_segment(int phoneme, std::size_t n, int rate,
                                  std::mt19937_64& rng) {
  const PhonemeVoice v = voice_for(phoneme);
  const double nyquist_guard = 7600.0;
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);

  struct Component { double freq, amp, phi; };
  std::vector<Component> comps;
  for (int h = 1; h * v.f0 < nyquist_guard; ++h) {
    const double f = h * v.f0;
    comps.push_back({f, envelope(f, v), phase(rng)});
  }
  // Band-limited noise as a bundle of random-phase sinusoids.
  constexpr int kNoiseComponents = 32;
  std::uniform_real_distribution<double> band(v.noise_lo, v.noise_hi);
  double harm_norm = 0.0;
  for (const auto& c : comps) harm_norm += c.amp * c.amp;
  harm_norm = std::sqrt(std::max(harm_norm, 1e-12));
  const double namp = v.noise_gain * harm_norm / std::sqrt(double(kNoiseComponents));
  for (int j = 0; j < kNoiseComponents; ++j)
    comps.push_back({band(rng), namp, phase(rng)});

  std::vector<double> seg(n, 0.0);
  for (const auto& c : comps) {
    const double w = kTwoPi * c.freq / rate;
    for (std::size_t i = 0; i < n; ++i) seg[i] += c.amp * std::sin(w * i + c.phi);
  }
  const double r = rms(seg);
  if (r > 0.0) {
    const double scale = 0.18 / r;
    for (double& s : seg) s *= scale;
  }
  apply_edge_ramp(seg, static_cast<std::size_t>(0.005 * rate));
  return seg;
}

}  // namespace

void Waveform::validate() const {
  if (sample_rate_hz <= 0) throw std::invalid_argument("waveform: sample_rate_hz must be positive");
  for (double s : samples)
    if (!std::isfinite(s)) throw std::invalid_argument("waveform: non-finite sample");
}

SynthSpeech synth_speech(const UtteranceSpec& spec, const FramingParams& framing) {
  if (spec.phonemes.empty()) throw std::invalid_argument("synth_speech: empty phoneme sequence");
  if (spec.phonemes.size() != spec.durations_ms.size())
    throw std::invalid_argument("synth_speech: phoneme/duration count mismatch");
  for (int p : spec.phonemes)
    if (p < 0 || p >= kNumPhonemes)
      throw std::invalid_argument("synth_speech: phoneme id out of range");
  for (int d : spec.durations_ms)
    if (d <= 0) throw std::invalid_argument("synth_speech: non-positive duration");

  const int rate = framing.sample_rate_hz;
  SynthSpeech out;
  out.wave.sample_rate_hz = rate;

  std::vector<std::size_t> seg_ends;  // cumulative sample boundaries
  for (std::size_t i = 0; i < spec.phonemes.size(); ++i) {
    const std::size_t n = static_cast<std::size_t>(spec.durations_ms[i]) * rate / 1000;
    auto rng = make_rng(derive_seed(spec.seed, i));
    std::vector<double> seg = synth_segment(spec.phonemes[i], n, rate, rng);
    out.wave.samples.insert(out.wave.samples.end(), seg.begin(), seg.end());
    seg_ends.push_back(out.wave.samples.size());
  }
  double peak = 0.0;
  for (double s : out.wave.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.95) {
    const double scale = 0.95 / peak;
    for (double& s : out.wave.samples) s *= scale;
  }

  // Label each frame by the segment that contains its center sample.
  const std::size_t n_frames = framing.num_frames(out.wave.samples.size());
  const std::size_t shift = framing.shift_samples();
  const std::size_t half_win = framing.window_samples() / 2;
  std::size_t seg = 0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t center = f * shift + half_win;
    while (seg + 1 < seg_ends.size() && center >= seg_ends[seg]) ++seg;
    out.frame_labels.push_back(spec.phonemes[seg]);
  }
  return out;
}

namespace {

std::vector<double> synth_fan_bed(std::size_t n, int rate, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);

  struct Component { double freq, amp, phi; };
  std::vector<Component> comps;
  // Rotational hum plus harmonics.
  const double hum_amps[] = {1.0, 0.55, 0.4, 0.3};
  for (int h = 0; h < 4; ++h) comps.push_back({120.0 * (h + 1), 0.9 * hum_amps[h], phase(rng)});
  // Broadband bed, amplitude falling off with frequency.
  constexpr int kBedComponents = 160;
  std::uniform_real_distribution<double> band(80.0, 7200.0);
  for (int j = 0; j < kBedComponents; ++j) {
    const double f = band(rng);
    comps.push_back({f, 6.0 / std::sqrt(f), phase(rng)});
  }
  std::vector<double> fan(n, 0.0);
  for (const auto& c : comps) {
    const double w = kTwoPi * c.freq / rate;
    for (std::size_t i = 0; i < n; ++i) fan[i] += c.amp * std::sin(w * i + c.phi);
  }
  const double r = rms(fan);
  if (r > 0.0) {
    const double scale = 0.15 / r;
    for (double& s : fan) s *= scale;
  }
  return fan;
}

void add_motor_burst(std::vector<double>& noise, std::size_t begin, std::size_t end,
                     int rate, double gain, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> f_start(250.0, 450.0);
  std::uniform_real_distribution<double> f_stop(600.0, 900.0);
  std::uniform_real_distribution<double> fm_dist(8.0, 18.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  const double f0 = f_start(rng);
  const double f1 = f_stop(rng);
  const double fm = fm_dist(rng);
  const double phi_m = phase(rng);
  double phi_h[4] = {phase(rng), phase(rng), phase(rng), phase(rng)};

  const std::size_t len = end - begin;
  const std::size_t ramp = std::min<std::size_t>(static_cast<std::size_t>(0.02 * rate), len / 2);
  double phase_acc = 0.0;  // integrated chirp phase
  for (std::size_t i = 0; i < len; ++i) {
    const double u = static_cast<double>(i) / len;
    const double inst_f = f0 + (f1 - f0) * u;
    phase_acc += kTwoPi * inst_f / rate;
    double s = 0.0;
    for (int h = 1; h <= 4; ++h) s += std::sin(h * phase_acc + phi_h[h - 1]) / h;
    const double am = 0.55 + 0.45 * std::sin(kTwoPi * fm * i / rate + phi_m);
    double env = 1.0;
    if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 1) / (ramp + 1));
    else if (len - 1 - i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * (len - i) / (ramp + 1));
    noise[begin + i] += gain * 0.3 * am * env * s;
  }
}

}  // namespace

MotorStateTrack motor_track_from_bursts(
    std::size_t n_frames,
    const std::vector<std::pair<std::size_t, std::size_t>>& bursts,
    const FramingParams& framing) {
  // Merge to a disjoint union so overlapping bursts are not double counted.
  auto merged = bursts;
  std::sort(merged.begin(), merged.end());
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& b : merged) {
    if (!spans.empty() && b.first <= spans.back().second)
      spans.back().second = std::max(spans.back().second, b.second);
    else
      spans.push_back(b);
  }
  const std::size_t win = framing.window_samples();
  const std::size_t shift = framing.shift_samples();
  MotorStateTrack track(n_frames, MotorState::Off);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t lo = f * shift;
    const std::size_t hi = lo + win;
    std::size_t overlap = 0;
    for (const auto& s : spans) {
      const std::size_t a = std::max(lo, s.first);
      const std::size_t b = std::min(hi, s.second);
      if (b > a) overlap += b - a;
    }
    if (2 * overlap >= win) track[f] = MotorState::On;
  }
  return track;
}

EgoNoise synth_ego_noise(NoiseKind kind, int duration_ms, std::uint64_t seed,
                         const FramingParams& framing, const MovementParams& movement) {
  if (duration_ms <= 0) throw std::invalid_argument("synth_ego_noise: non-positive duration");
  const int rate = framing.sample_rate_hz;
  const std::size_t n = static_cast<std::size_t>(duration_ms) * rate / 1000;

  EgoNoise out;
  out.wave.sample_rate_hz = rate;
  out.wave.samples = synth_fan_bed(n, rate, derive_seed(seed, 1));

  if (kind == NoiseKind::FanPlusMovement) {
    auto rng = make_rng(derive_seed(seed, 2));
    const double mean_bursts = movement.burst_rate_hz * duration_ms / 1000.0;
    std::size_t n_bursts = 0;
    if (mean_bursts > 0.0) {
      std::poisson_distribution<int> draw(mean_bursts);
      n_bursts = static_cast<std::size_t>(std::max(0, draw(rng)));
    }
    std::uniform_int_distribution<int> len_ms(movement.burst_ms_min, movement.burst_ms_max);
    for (std::size_t b = 0; b < n_bursts; ++b) {
      std::size_t len = static_cast<std::size_t>(len_ms(rng)) * rate / 1000;
      len = std::min(len, n);
      const std::size_t max_start = n - len;
      std::uniform_int_distribution<std::size_t> start_dist(0, max_start);
      const std::size_t begin = start_dist(rng);
      out.bursts.emplace_back(begin, begin + len);
      add_motor_burst(out.wave.samples, begin, begin + len, rate, movement.burst_gain, rng);
    }
  }
  out.motor = motor_track_from_bursts(framing.num_frames(n), out.bursts, framing);
  return out;
}

double mean_square(const std::vector<double>& samples, std::size_t n) {
  n = std::min(n, samples.size());
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += samples[i] * samples[i];
  return acc / n;
}

MixResult mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db,
                     std::optional<std::uint64_t> offset_seed) {
  if (clean.sample_rate_hz != noise.sample_rate_hz)
    throw std::invalid_argument("mix_at_snr: sample-rate mismatch");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("mix_at_snr: non-finite SNR");
  const std::size_t len = clean.samples.size();
  if (len == 0) throw std::invalid_argument("mix_at_snr: empty clean signal");
  if (noise.samples.size() < len)
    throw std::invalid_argument("mix_at_snr: noise shorter than clean signal");

  std::size_t offset = 0;
  if (offset_seed) {
    auto rng = make_rng(*offset_seed);
    std::uniform_int_distribution<std::size_t> dist(0, noise.samples.size() - len);
    offset = dist(rng);
  }

  const double p_clean = mean_square(clean.samples, len);
  double p_noise = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double s = noise.samples[offset + i];
    p_noise += s * s;
  }
  p_noise /= len;
  if (p_clean <= 0.0) throw std::invalid_argument("mix_at_snr: zero-power clean signal, SNR undefined");
  if (p_noise <= 0.0) throw std::invalid_argument("mix_at_snr: zero-power noise signal, SNR undefined");

  MixResult out;
  out.gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  out.mixture.sample_rate_hz = clean.sample_rate_hz;
  out.mixture.samples.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    double s = clean.samples[i] + out.gain * noise.samples[offset + i];
    if (s > 1.0) { s = 1.0; ++out.clipped; }
    else if (s < -1.0) { s = -1.0; ++out.clipped; }
    out.mixture.samples[i] = s;
  }
  if (out.clipped > 0)
    log_warn("mix_at_snr: clipped " + std::to_string(out.clipped) + " of " +
             std::to_string(len) + " samples at " + std::to_string(snr_db) + " dB");
  return out;
}

void write_motor_track(const std::string& path, const MotorStateTrack& track) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "frame,motor_on\n";
  for (std::size_t i = 0; i < track.size(); ++i)
    f << i << ',' << (track[i] == MotorState::On ? 1 : 0) << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

MotorStateTrack read_motor_track(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "frame,motor_on")
    throw std::runtime_error("motor track " + path + ": bad header, expected 'frame,motor_on'");
  MotorStateTrack track;
  std::size_t expected = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::size_t idx;
    char comma;
    int on;
    if (!(ss >> idx >> comma >> on) || comma != ',' || (on != 0 && on != 1))
      throw std::runtime_error("motor track " + path + ": malformed line '" + line + "'");
    if (idx != expected)
      throw std::runtime_error("motor track " + path + ": non-contiguous frame index");
    ++expected;
    track.push_back(on ? MotorState::On : MotorState::Off);
  }
  return track;
}

}  // namespace egonoise::signal
