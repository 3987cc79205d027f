#include "egonoise/features.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace egonoise::frontend {

namespace {
constexpr char kMagic[4] = {'E', 'G', 'N', 'F'};
constexpr std::uint16_t kVersion = 1;

static_assert(sizeof(float) == 4);
}  // namespace

void FeatureMatrix::validate() const {
  if (data.rows() < 1) throw std::invalid_argument("feature matrix: no frames");
  if (!data.allFinite()) throw std::invalid_argument("feature matrix: non-finite entry");
}

void save_features(const std::string& path, const FeatureMatrix& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kMagic, 4);
  const std::uint16_t ver = kVersion;
  const std::uint32_t frames = static_cast<std::uint32_t>(f.frames());
  const std::uint32_t dims = static_cast<std::uint32_t>(f.dims());
  out.write(reinterpret_cast<const char*>(&ver), 2);
  out.write(reinterpret_cast<const char*>(&frames), 4);
  out.write(reinterpret_cast<const char*>(&dims), 4);
  std::vector<float> row(dims);
  for (std::uint32_t r = 0; r < frames; ++r) {
    for (std::uint32_t c = 0; c < dims; ++c) row[c] = static_cast<float>(f.data(r, c));
    out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(4) * dims);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

FeatureMatrix load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  std::uint16_t ver = 0;
  std::uint32_t frames = 0, dims = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&ver), 2);
  in.read(reinterpret_cast<char*>(&frames), 4);
  in.read(reinterpret_cast<char*>(&dims), 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": not a feature archive (bad magic)");
  if (ver != kVersion)
    throw std::runtime_error(path + ": unsupported feature archive version " + std::to_string(ver));
  FeatureMatrix f;
  f.data.resize(frames, dims);
  std::vector<float> row(dims);
  for (std::uint32_t r = 0; r < frames; ++r) {
    in.read(reinterpret_cast<char*>(row.data()), std::streamsize(4) * dims);
    if (!in) throw std::runtime_error(path + ": truncated feature payload");
    for (std::uint32_t c = 0; c < dims; ++c) f.data(r, c) = row[c];
  }
  return f;
}

void export_features_csv(const std::string& path, const FeatureMatrix& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "frame";
  for (std::size_t c = 0; c < f.dims(); ++c) out << ",d" << c;
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < f.frames(); ++r) {
    out << r;
    for (std::size_t c = 0; c < f.dims(); ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", f.data(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace egonoise::frontend
