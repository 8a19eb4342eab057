#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace swnav::sigproc {

struct WavData {
  std::vector<double> samples;  // selected channel, normalized to [-1, 1]
  double sample_rate_hz = 0.0;
  std::uint16_t channel_count = 0;
};

// RIFF/WAVE reader for PCM 16-bit and IEEE float 32-bit. PCM samples are
// scaled by 1/32768; float samples pass through untouched.
WavData load_wav(const std::filesystem::path& path, std::size_t channel = 0);

enum class WavEncoding { pcm16, float32 };

void write_wav(const std::filesystem::path& path,
               const std::vector<double>& samples, double sample_rate_hz,
               WavEncoding encoding = WavEncoding::float32);

}  // namespace swnav::sigproc
