#include "waveguide/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "core/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts need swaps");

namespace swnav::waveguide {
namespace {

constexpr char kMagic[4] = {'W', 'G', 'F', '1'};
constexpr std::uint32_t kFlagTruth = 1u << 0;
constexpr std::uint32_t kFlagCarrierPhase = 1u << 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_bytes(std::FILE* f, const void* p, size_t n,
                 const std::filesystem::path& path) {
  if (std::fwrite(p, 1, n, f) != n)
    throw Error(ErrorKind::io, "short write to " + path.string());
}

void read_bytes(std::FILE* f, void* p, size_t n,
                const std::filesystem::path& path) {
  if (std::fread(p, 1, n, f) != n)
    throw Error(ErrorKind::corrupt_header,
                "unexpected end of field file " + path.string());
}

}  // namespace

void write_field(const PressureFieldSeries& series,
                 const std::filesystem::path& path) {
  const auto tones = static_cast<std::uint32_t>(series.tones_hz.size());
  const auto snapshots = static_cast<std::uint64_t>(series.samples.size());
  if (tones == 0 || snapshots == 0)
    throw Error(ErrorKind::config, "refusing to write empty field series");

  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f)
    throw Error(ErrorKind::io, "cannot open " + path.string() + " for write");

  std::uint32_t flags = 0;
  if (!series.truth.empty()) {
    if (series.truth.size() != snapshots)
      throw Error(ErrorKind::config, "truth length does not match snapshots");
    flags |= kFlagTruth;
  }
  if (series.carrier_phase) flags |= kFlagCarrierPhase;

  write_bytes(f.get(), kMagic, 4, path);
  write_bytes(f.get(), &tones, sizeof tones, path);
  write_bytes(f.get(), &snapshots, sizeof snapshots, path);
  write_bytes(f.get(), &series.snapshot_interval_s, 8, path);
  write_bytes(f.get(), &flags, sizeof flags, path);
  write_bytes(f.get(), series.tones_hz.data(), 8 * tones, path);

  std::vector<double> row(2 * static_cast<size_t>(tones));
  for (const auto& snap : series.samples) {
    if (snap.size() != tones)
      throw Error(ErrorKind::config, "ragged field series");
    for (size_t j = 0; j < tones; ++j) {
      row[2 * j] = snap[j].real();
      row[2 * j + 1] = snap[j].imag();
    }
    write_bytes(f.get(), row.data(), 8 * row.size(), path);
  }

  if (flags & kFlagTruth) {
    for (const auto& t : series.truth) {
      double pair[2] = {t.range_m, t.range_rate_mps};
      write_bytes(f.get(), pair, sizeof pair, path);
    }
  }
  if (std::fflush(f.get()) != 0)
    throw Error(ErrorKind::io, "flush failed for " + path.string());
}

PressureFieldSeries read_field(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw Error(ErrorKind::io, "cannot open " + path.string());

  char magic[4];
  read_bytes(f.get(), magic, 4, path);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw Error(ErrorKind::corrupt_header,
                path.string() + " is not a WGF1 field file");

  std::uint32_t tones = 0;
  std::uint64_t snapshots = 0;
  double t_delta = 0.0;
  std::uint32_t flags = 0;
  read_bytes(f.get(), &tones, sizeof tones, path);
  read_bytes(f.get(), &snapshots, sizeof snapshots, path);
  read_bytes(f.get(), &t_delta, 8, path);
  read_bytes(f.get(), &flags, sizeof flags, path);

  if (tones == 0 || tones > 1024)
    throw Error(ErrorKind::corrupt_header, "implausible tone count");
  if (snapshots == 0 || snapshots > (1ull << 32))
    throw Error(ErrorKind::corrupt_header, "implausible snapshot count");
  if (!(t_delta > 0.0) || !std::isfinite(t_delta))
    throw Error(ErrorKind::corrupt_header, "non-positive snapshot interval");

  PressureFieldSeries out;
  out.snapshot_interval_s = t_delta;
  out.carrier_phase = (flags & kFlagCarrierPhase) != 0;
  out.tones_hz.resize(tones);
  read_bytes(f.get(), out.tones_hz.data(), 8 * tones, path);

  out.samples.resize(snapshots);
  std::vector<double> row(2 * static_cast<size_t>(tones));
  for (auto& snap : out.samples) {
    read_bytes(f.get(), row.data(), 8 * row.size(), path);
    snap.resize(tones);
    for (size_t j = 0; j < tones; ++j)
      snap[j] = {row[2 * j], row[2 * j + 1]};
  }

  if (flags & kFlagTruth) {
    out.truth.resize(snapshots);
    for (auto& t : out.truth) {
      double pair[2];
      read_bytes(f.get(), pair, sizeof pair, path);
      t.range_m = pair[0];
      t.range_rate_mps = pair[1];
    }
  }
  return out;
}

}  // namespace swnav::waveguide
