#pragma once

#include <cstddef>
#include <stdexcept>

namespace egonoise {

// Short-time analysis grid shared by the feature front-end and the
// motor-state track: frame i covers samples [i*shift, i*shift + window).
struct FramingParams {
  int window_ms = 25;
  int shift_ms = 10;
  int fft_size = 512;
  int n_mel = 23;
  int n_ceps = 13;
  int sample_rate_hz = 16000;

  std::size_t window_samples() const {
    return static_cast<std::size_t>(window_ms) * sample_rate_hz / 1000;
  }
  std::size_t shift_samples() const {
    return static_cast<std::size_t>(shift_ms) * sample_rate_hz / 1000;
  }

  void validate() const {
    if (sample_rate_hz <= 0) throw std::invalid_argument("framing: sample_rate_hz must be positive");
    if (shift_ms <= 0 || window_ms <= shift_ms)
      throw std::invalid_argument("framing: require window_ms > shift_ms > 0");
    if (static_cast<std::size_t>(fft_size) < window_samples())
      throw std::invalid_argument("framing: fft_size smaller than analysis window");
    if (n_ceps <= 0 || n_mel < n_ceps)
      throw std::invalid_argument("framing: require 0 < n_ceps <= n_mel");
  }

  // floor((len - window) / shift) + 1; zero frames when the signal is
  // shorter than one window.
  std::size_t num_frames(std::size_t num_samples) const {
    const std::size_t win = window_samples();
    if (num_samples < win) return 0;
    return (num_samples - win) / shift_samples() + 1;
  }
};

}  // namespace egonoise
