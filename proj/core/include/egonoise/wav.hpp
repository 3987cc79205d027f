#pragma once

#include <string>

#include "egonoise/signal.hpp"

namespace egonoise::signal {

// RIFF/WAVE, PCM 16-bit little-endian, mono. Anything else is rejected
// with a format diagnostic.
Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w);

}  // namespace egonoise::signal
