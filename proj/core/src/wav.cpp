// Minimal RIFF/WAVE reader and writer: PCM, 16-bit, mono.

#include "egonoise/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace egonoise::signal {

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
  b.push_back((v >> 16) & 0xff);
  b.push_back((v >> 24) & 0xff);
}

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
}

void put_tag(std::vector<std::uint8_t>& b, const char* tag) {
  b.insert(b.end(), tag, tag + 4);
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return std::uint16_t(p[0]) | std::uint16_t(p[1]) << 8;
}

}  // namespace

void write_wav(const std::string& path, const Waveform& w) {
  w.validate();
  const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_bytes = n * 2;

  std::vector<std::uint8_t> buf;
  buf.reserve(44 + data_bytes);
  put_tag(buf, "RIFF");
  put_u32(buf, 36 + data_bytes);
  put_tag(buf, "WAVE");
  put_tag(buf, "fmt ");
  put_u32(buf, 16);
  put_u16(buf, 1);  // PCM
  put_u16(buf, 1);  // mono
  put_u32(buf, static_cast<std::uint32_t>(w.sample_rate_hz));
  put_u32(buf, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);  // byte rate
  put_u16(buf, 2);   // block align
  put_u16(buf, 16);  // bits per sample
  put_tag(buf, "data");
  put_u32(buf, data_bytes);
  for (double s : w.samples) {
    double clamped = s;
    if (clamped > 1.0) clamped = 1.0;
    if (clamped < -1.0) clamped = -1.0;
    const auto q = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
    put_u16(buf, static_cast<std::uint16_t>(q));
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

Waveform read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error(path + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  int sample_rate = 0;
  const std::uint8_t* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::uint8_t* chunk = buf.data() + pos;
    const std::uint32_t chunk_len = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_len > buf.size())
      throw std::runtime_error(path + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw std::runtime_error(path + ": malformed fmt chunk");
      const std::uint16_t format = get_u16(buf.data() + body);
      const std::uint16_t channels = get_u16(buf.data() + body + 2);
      const std::uint16_t bits = get_u16(buf.data() + body + 14);
      if (format != 1)
        throw std::runtime_error(path + ": unsupported audio format (want PCM)");
      if (channels != 1)
        throw std::runtime_error(path + ": unsupported channel count (want mono, got " +
                                 std::to_string(channels) + ")");
      if (bits != 16)
        throw std::runtime_error(path + ": unsupported bit depth (want 16, got " +
                                 std::to_string(bits) + ")");
      sample_rate = static_cast<int>(get_u32(buf.data() + body + 4));
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = buf.data() + body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word aligned
  }
  if (!have_fmt) throw std::runtime_error(path + ": missing fmt chunk");
  if (data == nullptr) throw std::runtime_error(path + ": missing data chunk");
  if (data_len % 2 != 0) throw std::runtime_error(path + ": odd data chunk size");

  Waveform w;
  w.sample_rate_hz = sample_rate;
  w.samples.resize(data_len / 2);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const auto q = static_cast<std::int16_t>(get_u16(data + 2 * i));
    w.samples[i] = q / 32767.0;
  }
  w.validate();
  return w;
}

}  // namespace egonoise::signal
