#pragma once

#include "egonoise/features.hpp"
#include "egonoise/framing.hpp"
#include "egonoise/signal.hpp"

namespace egonoise::frontend {

// 13-dim MFCC per frame: per-frame pre-emphasis (0.97), Hamming window,
// magnitude FFT, triangular mel filterbank over 0..nyquist, log with a
// 1e-10 floor, orthonormal DCT-II, coefficients 0..n_ceps-1.
FeatureMatrix mfcc(const signal::Waveform& w, const FramingParams& p);

// Column order is fixed as (off, on).
FeatureMatrix one_hot_motor(const signal::MotorStateTrack& track);

// Columns of a followed by columns of b; frame counts must match.
FeatureMatrix concat_features(const FeatureMatrix& a, const FeatureMatrix& b);

// Frame t becomes the concatenation of frames t-c/2 .. t+c/2 with edge
// replication at utterance boundaries; context must be odd.
FeatureMatrix stack_context(const FeatureMatrix& f, int context);

// Per-utterance cepstral mean subtraction (opt-in; off by default).
FeatureMatrix apply_cmn(const FeatureMatrix& f);

// Mel filterbank center frequencies in Hz, exposed for verification.
std::vector<double> mel_filter_centers_hz(const FramingParams& p);

// Per-frame mel filter energies (frames x n_mel), before log and DCT.
FeatureMatrix mel_energies(const signal::Waveform& w, const FramingParams& p);

}  // namespace egonoise::frontend
