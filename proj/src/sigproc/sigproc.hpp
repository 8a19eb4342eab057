#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "waveguide/waveguide.hpp"

namespace swnav::sigproc {

enum class WindowKind { hann, rect };
enum class Provenance { wav, synthetic, imported };

struct DftConfig {
  double sample_rate_hz = 3276.8;
  std::size_t n_dft = 3276;
  double overlap = 0.0;  // fraction alpha in [0, 1)
  WindowKind window = WindowKind::hann;

  // Samples between consecutive snapshot starts, (1 - alpha) * n_dft.
  // Throws Error(config) unless that is a positive whole number.
  std::size_t hop() const;
  double snapshot_interval_s() const;
  void validate() const;
};

struct Spectrogram {
  std::vector<double> bin_freqs_hz;  // one-sided, 0 through Nyquist
  double snapshot_interval_s = 1.0;
  std::vector<std::vector<double>> intensity;  // [snapshot][bin], |X|^2
  Provenance provenance = Provenance::synthetic;

  std::size_t snapshot_count() const { return intensity.size(); }
};

struct FramedSeries {
  waveguide::PressureFieldSeries series;  // carrier_phase = true
  Spectrogram spectrogram;
};

// Slices raw samples into windowed frames of n_dft advancing by hop(),
// DFTs each frame (unnormalized), keeps the one-sided magnitude-squared
// rows, and picks each tone's complex value from its nearest bin.
FramedSeries frame_and_dft(std::span<const double> raw, const DftConfig& cfg,
                           const std::vector<double>& tones_hz);
FramedSeries frame_and_dft(std::span<const std::complex<double>> raw,
                           const DftConfig& cfg,
                           const std::vector<double>& tones_hz);

std::size_t nearest_bin(double tone_hz, const DftConfig& cfg);

// 10 log10 of mean tone-bin intensity over mean noise-bin intensity,
// averaged over all snapshots; capped at +300 dB when the floor is zero.
// Bin sets must be non-empty and disjoint.
double estimate_snr(const Spectrogram& spec,
                    const std::vector<std::size_t>& tone_bins,
                    const std::vector<std::size_t>& noise_bins);

// Every bin except the tones, DC, and Nyquist, with a guard of
// `guard_bins` on each side of every tone bin.
std::vector<std::size_t> default_noise_bins(
    std::size_t bin_count, const std::vector<std::size_t>& tone_bins,
    std::size_t guard_bins = 2);

// Header row of bin frequencies, then one intensity row per snapshot.
void write_spectrogram_csv(const Spectrogram& spec,
                           const std::filesystem::path& path);

}  // namespace swnav::sigproc
