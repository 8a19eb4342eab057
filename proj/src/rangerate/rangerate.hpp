#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "waveguide/waveguide.hpp"

namespace swnav::rangerate {

struct RangeRateConfig {
  std::size_t segment_half_len = 120;  // L snapshots each side of center
  double tone_hz = 109.0;
  double sound_speed_mps = 1500.0;  // stands in for mean modal phase speed
  std::size_t zero_pad_factor = 16;
  double band_min_mps = 0.0;
  double band_max_mps = 10.0;

  void validate() const;
};

// Residual range rate injected by a snapshot interval that is not an
// integer number of carrier cycles; subtract it from raw estimates made on
// carrier-bearing series. Positive for f * t_delta just below an integer.
double phase_offset_mps(double f_hz, double t_delta_s, double v_mps);

// I_c[k] = Re{ p[n-k] conj(p[n+k]) }, k in 0..L, for one tone index.
std::vector<double> difference_product(
    const waveguide::PressureFieldSeries& series, std::size_t n,
    std::size_t half_len, std::size_t tone_index);

struct RangeRateEstimate {
  double range_rate_mps = 0.0;
  double bin_width_mps = 0.0;  // padded DFT resolution before refinement
};

// Peak of the zero-padded magnitude spectrum of I_c inside the band image,
// 3-point parabolic refinement, then inversion of w = 4 pi f rdot t_delta
// / v. The cosine spectrum is even, so several (sign, wrap) branches can
// land in the band; `hint_mps` picks the branch nearest a previous
// estimate, otherwise the smallest magnitude wins.
RangeRateEstimate estimate_range_rate(std::span<const double> ic,
                                      const RangeRateConfig& cfg,
                                      double t_delta_s, double offset_mps,
                                      std::optional<double> hint_mps = {});

struct RangeRateTrack {
  std::size_t segment_half_len = 0;
  double t_delta_s = 1.0;
  // smoothed[m] = y_rdot at center m, defined for m in [first, last].
  std::size_t first_center = 0;
  std::size_t last_center = 0;
  std::vector<double> smoothed;  // index m - first_center
  double bin_width_mps = 0.0;

  double smoothed_at(std::size_t m) const {
    return smoothed[m - first_center];
  }
};

// Runs the difference method at every feasible center snapshot.
RangeRateTrack compute_track(const waveguide::PressureFieldSeries& series,
                             const RangeRateConfig& cfg);

// Least-squares slope of y over a window of L+1 consecutive centers ending
// at n-L, extrapolated L steps forward: z(n) = y(n-L) + slope * L * t_delta.
double predict_realtime(std::span<const double> y_window, double t_delta_s);

// z_rdot(n) from the track; requires centers n-2L .. n-L.
double realtime_estimate(const RangeRateTrack& track, std::size_t n);

// Rate series rate[l], l in 0..n-1, as reconstructible at wall-clock n:
// measured centers where available, head backfilled with the earliest
// center, linear extrapolation over the last L steps.
std::vector<double> realtime_rate_series(const RangeRateTrack& track,
                                         std::size_t n);

// First wall-clock index with a full prediction history.
std::size_t first_realtime_index(const RangeRateTrack& track);

void write_rangerate_csv(const std::filesystem::path& path,
                         const RangeRateTrack& track,
                         const std::vector<waveguide::TruthSample>& truth);

}  // namespace swnav::rangerate
