// MFCC front-end, auxiliary one-hot encoding and context splicing.

#include "egonoise/frontend.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace egonoise::frontend {

namespace {

constexpr double kPreEmphasis = 0.97;
constexpr double kLogFloor = 1e-10;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// n_mel + 2 boundary frequencies, equally spaced on the mel scale from
// 0 Hz to nyquist.
std::vector<double> mel_points_hz(const FramingParams& p) {
  const double nyquist = p.sample_rate_hz / 2.0;
  const double mel_hi = hz_to_mel(nyquist);
  std::vector<double> pts(p.n_mel + 2);
  for (int i = 0; i < p.n_mel + 2; ++i)
    pts[i] = mel_to_hz(mel_hi * i / (p.n_mel + 1));
  return pts;
}

// Triangular filters evaluated at FFT bin frequencies; n_mel x (fft/2 + 1).
Eigen::MatrixXd mel_filterbank(const FramingParams& p) {
  const auto pts = mel_points_hz(p);
  const int n_bins = p.fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(p.sample_rate_hz) / p.fft_size;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(p.n_mel, n_bins);
  for (int m = 0; m < p.n_mel; ++m) {
    const double lo = pts[m], center = pts[m + 1], hi = pts[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      if (f > lo && f < center)
        fb(m, k) = (f - lo) / (center - lo);
      else if (f >= center && f < hi)
        fb(m, k) = (hi - f) / (hi - center);
    }
  }
  return fb;
}

// Orthonormal DCT-II, n_ceps x n_mel.
Eigen::MatrixXd dct_matrix(int n_ceps, int n_mel) {
  Eigen::MatrixXd d(n_ceps, n_mel);
  for (int k = 0; k < n_ceps; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_mel);
    for (int m = 0; m < n_mel; ++m)
      d(k, m) = scale * std::cos(std::numbers::pi * k * (2 * m + 1) / (2.0 * n_mel));
  }
  return d;
}

Eigen::MatrixXd frame_mel_energies(const signal::Waveform& w, const FramingParams& p) {
  p.validate();
  w.validate();
  const std::size_t win = p.window_samples();
  const std::size_t shift = p.shift_samples();
  const std::size_t n_frames = p.num_frames(w.samples.size());
  if (n_frames == 0)
    throw std::invalid_argument("mfcc: waveform shorter than one analysis window (" +
                                std::to_string(w.samples.size()) + " < " +
                                std::to_string(win) + " samples)");

  std::vector<double> hamming(win);
  for (std::size_t i = 0; i < win; ++i)
    hamming[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (win - 1));

  const Eigen::MatrixXd fb = mel_filterbank(p);
  const int n_bins = p.fft_size / 2 + 1;

  Eigen::FFT<double> fft;
  std::vector<double> frame(p.fft_size);
  std::vector<std::complex<double>> spectrum;
  Eigen::VectorXd mag(n_bins);

  Eigen::MatrixXd energies(n_frames, p.n_mel);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const double* src = w.samples.data() + t * shift;
    // HTK-style per-frame pre-emphasis, then Hamming window, then zero pad.
    frame[0] = src[0] * (1.0 - kPreEmphasis) * hamming[0];
    for (std::size_t i = 1; i < win; ++i)
      frame[i] = (src[i] - kPreEmphasis * src[i - 1]) * hamming[i];
    std::fill(frame.begin() + win, frame.end(), 0.0);

    fft.fwd(spectrum, frame);
    for (int k = 0; k < n_bins; ++k) mag(k) = std::abs(spectrum[k]);
    energies.row(t) = (fb * mag).transpose();
  }
  return energies;
}

}  // namespace

std::vector<double> mel_filter_centers_hz(const FramingParams& p) {
  const auto pts = mel_points_hz(p);
  return {pts.begin() + 1, pts.end() - 1};
}

FeatureMatrix mel_energies(const signal::Waveform& w, const FramingParams& p) {
  FeatureMatrix f;
  f.data = frame_mel_energies(w, p);
  return f;
}

FeatureMatrix mfcc(const signal::Waveform& w, const FramingParams& p) {
  Eigen::MatrixXd energies = frame_mel_energies(w, p);
  energies = energies.cwiseMax(kLogFloor).array().log().matrix();
  const Eigen::MatrixXd dct = dct_matrix(p.n_ceps, p.n_mel);
  FeatureMatrix f;
  f.data = energies * dct.transpose();
  return f;
}

FeatureMatrix one_hot_motor(const signal::MotorStateTrack& track) {
  if (track.empty()) throw std::invalid_argument("one_hot_motor: empty track");
  FeatureMatrix f;
  f.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(track.size()), 2);
  for (std::size_t i = 0; i < track.size(); ++i)
    f.data(static_cast<Eigen::Index>(i), track[i] == signal::MotorState::On ? 1 : 0) = 1.0;
  return f;
}

FeatureMatrix concat_features(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.data.rows() != b.data.rows())
    throw std::invalid_argument("concat_features: frame count mismatch (" +
                                std::to_string(a.frames()) + " vs " +
                                std::to_string(b.frames()) + ")");
  FeatureMatrix out;
  out.data.resize(a.data.rows(), a.data.cols() + b.data.cols());
  out.data << a.data, b.data;
  return out;
}

FeatureMatrix stack_context(const FeatureMatrix& f, int context) {
  if (context < 1 || context % 2 == 0)
    throw std::invalid_argument("stack_context: context must be odd and >= 1, got " +
                                std::to_string(context));
  const Eigen::Index frames = f.data.rows();
  const Eigen::Index dims = f.data.cols();
  const int half = context / 2;
  FeatureMatrix out;
  out.data.resize(frames, dims * context);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int c = 0; c < context; ++c) {
      Eigen::Index src = t + c - half;
      if (src < 0) src = 0;                       // edge replication
      if (src >= frames) src = frames - 1;
      out.data.block(t, Eigen::Index(c) * dims, 1, dims) = f.data.row(src);
    }
  }
  return out;
}

FeatureMatrix apply_cmn(const FeatureMatrix& f) {
  FeatureMatrix out;
  out.data = f.data.rowwise() - f.data.colwise().mean();
  return out;
}

}  // namespace egonoise::frontend
