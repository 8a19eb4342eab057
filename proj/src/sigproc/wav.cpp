#include "sigproc/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "core/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "wav io assumes a little-endian host");

namespace swnav::sigproc {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void read_exact(std::FILE* f, void* p, size_t n, const char* what) {
  if (std::fread(p, 1, n, f) != n)
    throw swnav::Error(swnav::ErrorKind::corrupt_header,
                       std::string("wav file truncated in ") + what);
}

std::uint32_t read_u32(std::FILE* f, const char* what) {
  std::uint32_t v;
  read_exact(f, &v, 4, what);
  return v;
}

std::uint16_t read_u16(std::FILE* f, const char* what) {
  std::uint16_t v;
  read_exact(f, &v, 2, what);
  return v;
}

void write_exact(std::FILE* f, const void* p, size_t n,
                 const std::filesystem::path& path) {
  if (std::fwrite(p, 1, n, f) != n)
    throw swnav::Error(swnav::ErrorKind::io,
                       "short write to " + path.string());
}

}  // namespace

WavData load_wav(const std::filesystem::path& path, std::size_t channel) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f)
    throw Error(ErrorKind::io, "cannot open wav file " + path.string());

  char tag[5] = {};
  read_exact(f.get(), tag, 4, "riff header");
  if (std::memcmp(tag, "RIFF", 4) != 0)
    throw Error(ErrorKind::corrupt_header, path.string() + " is not RIFF");
  read_u32(f.get(), "riff size");
  read_exact(f.get(), tag, 4, "wave tag");
  if (std::memcmp(tag, "WAVE", 4) != 0)
    throw Error(ErrorKind::corrupt_header, path.string() + " is not WAVE");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::vector<std::uint8_t> data;
  bool have_data = false;

  while (!have_data || !have_fmt) {
    if (std::fread(tag, 1, 4, f.get()) != 4) break;
    const std::uint32_t size = read_u32(f.get(), "chunk size");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16)
        throw Error(ErrorKind::corrupt_header, "fmt chunk too small");
      format = read_u16(f.get(), "fmt");
      channels = read_u16(f.get(), "channels");
      rate = read_u32(f.get(), "sample rate");
      read_u32(f.get(), "byte rate");
      read_u16(f.get(), "block align");
      bits = read_u16(f.get(), "bits per sample");
      if (size > 16) std::fseek(f.get(), static_cast<long>(size - 16), SEEK_CUR);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data.resize(size);
      read_exact(f.get(), data.data(), size, "data chunk");
      have_data = true;
    } else {
      std::fseek(f.get(), static_cast<long>(size + (size & 1u)), SEEK_CUR);
      continue;
    }
    if (size & 1u) std::fseek(f.get(), 1, SEEK_CUR);
  }

  if (!have_fmt || !have_data)
    throw Error(ErrorKind::corrupt_header,
                "missing fmt or data chunk in " + path.string());
  if (channels == 0 || rate == 0)
    throw Error(ErrorKind::corrupt_header, "zero channels or sample rate");
  if (channel >= channels)
    throw Error(ErrorKind::config,
                "requested channel " + std::to_string(channel) + " of " +
                    std::to_string(channels));

  const bool pcm16 = format == 1 && bits == 16;
  const bool f32 = format == 3 && bits == 32;
  if (!pcm16 && !f32)
    throw Error(ErrorKind::unsupported_encoding,
                "only PCM 16-bit and IEEE float 32-bit are supported");

  const std::size_t bytes_per_sample = bits / 8u;
  const std::size_t stride = bytes_per_sample * channels;
  const std::size_t frames = data.size() / stride;

  WavData out;
  out.sample_rate_hz = static_cast<double>(rate);
  out.channel_count = channels;
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* p = data.data() + i * stride + channel * bytes_per_sample;
    if (pcm16) {
      std::int16_t v;
      std::memcpy(&v, p, 2);
      out.samples[i] = static_cast<double>(v) / 32768.0;
    } else {
      float v;
      std::memcpy(&v, p, 4);
      out.samples[i] = static_cast<double>(v);
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path,
               const std::vector<double>& samples, double sample_rate_hz,
               WavEncoding encoding) {
  if (!(sample_rate_hz > 0.0))
    throw Error(ErrorKind::config, "sample rate must be positive");
  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw Error(ErrorKind::io, "cannot open " + path.string());

  const bool f32 = encoding == WavEncoding::float32;
  const std::uint16_t bits = f32 ? 32 : 16;
  const std::uint16_t format = f32 ? 3 : 1;
  const std::uint32_t rate = static_cast<std::uint32_t>(std::llround(sample_rate_hz));
  const std::uint32_t bytes = static_cast<std::uint32_t>(samples.size() * bits / 8u);
  const std::uint32_t riff_size = 36 + bytes;
  const std::uint16_t block = bits / 8u;
  const std::uint32_t byte_rate = rate * block;

  write_exact(f.get(), "RIFF", 4, path);
  write_exact(f.get(), &riff_size, 4, path);
  write_exact(f.get(), "WAVEfmt ", 8, path);
  const std::uint32_t fmt_size = 16;
  const std::uint16_t channels = 1;
  write_exact(f.get(), &fmt_size, 4, path);
  write_exact(f.get(), &format, 2, path);
  write_exact(f.get(), &channels, 2, path);
  write_exact(f.get(), &rate, 4, path);
  write_exact(f.get(), &byte_rate, 4, path);
  write_exact(f.get(), &block, 2, path);
  write_exact(f.get(), &bits, 2, path);
  write_exact(f.get(), "data", 4, path);
  write_exact(f.get(), &bytes, 4, path);

  for (double s : samples) {
    if (f32) {
      const float v = static_cast<float>(s);
      write_exact(f.get(), &v, 4, path);
    } else {
      const double scaled = std::round(s * 32768.0);
      const auto v = static_cast<std::int16_t>(
          std::clamp(scaled, -32768.0, 32767.0));
      write_exact(f.get(), &v, 2, path);
    }
  }
  if (std::fflush(f.get()) != 0)
    throw Error(ErrorKind::io, "flush failed for " + path.string());
}

}  // namespace swnav::sigproc
