#pragma once

#include <filesystem>

#include "waveguide/waveguide.hpp"

namespace swnav::waveguide {

// Little-endian binary field container ("WGF1"):
//   magic   4 bytes  "WGF1"
//   u32     tone count
//   u64     snapshot count
//   f64     snapshot interval t_delta (s)
//   u32     truth flag (0 or 1)
//   f64[tone count]                tone frequencies (Hz)
//   f64[2 * tones * snapshots]     samples, snapshot-major, (re, im) pairs
//   f64[2 * snapshots]             truth (range_m, range_rate_mps), if flagged
void write_field(const PressureFieldSeries& series,
                 const std::filesystem::path& path);

PressureFieldSeries read_field(const std::filesystem::path& path);

}  // namespace swnav::waveguide
