#pragma once

#include <Eigen/Core>
#include <string>

namespace egonoise::frontend {

// Frames-by-dims real matrix; one row per analysis frame. Holds spectral
// features, auxiliary one-hot columns, spliced context stacks and extracted
// bottleneck activations alike.
struct FeatureMatrix {
  Eigen::MatrixXd data;  // frames x dims

  std::size_t frames() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(data.cols()); }
  void validate() const;
};

// Binary archive, one utterance per file: magic "EGNF", u16 version,
// u32 frames, u32 dims, then row-major 32-bit little-endian floats.
void save_features(const std::string& path, const FeatureMatrix& f);
FeatureMatrix load_features(const std::string& path);

// Sidecar CSV export for debugging; not meant to round-trip exactly.
void export_features_csv(const std::string& path, const FeatureMatrix& f);

}  // namespace egonoise::frontend
