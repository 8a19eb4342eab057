#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "waveguide/waveguide.hpp"

namespace swnav::wiranging {

struct WiConfig {
  std::vector<double> tones_hz;
  std::size_t window_len = 600;
  // Most snapshots of history used for stretching; 0 means all available.
  std::size_t stretch_cap = 0;
  double beta_min = 0.8;
  double beta_max = 1.5;
  double beta_step = 0.005;
  double range_min_m = 200.0;
  double range_max_m = 10000.0;
  double range_step_m = 10.0;
  // Fraction of the window a tone pair must cover after stretching
  // before it contributes; its correlation is then weighted linearly
  // from 0 at this fraction up to 1 at full coverage.
  double min_overlap = 0.25;
  // Grid candidates whose pair weights sum below this are invalid, so a
  // lone sliver of coverage cannot win the argmax.
  double min_total_weight = 0.5;
  bool log_intensity = false;

  void validate() const;
};

// Ranges assigned to snapshots 0..n, anchored at the reference r_m[n].
struct RangeAxis {
  std::vector<double> r_m;
};

// r_i = r_n - sum_{l=i}^{n-1} z_rdot[l] * t_delta. Throws
// non_positive_range if any r_i <= 0.
RangeAxis build_range_axis(std::span<const double> z_rdot_mps,
                           double r_n_m, double t_delta_s);

struct StretchedRow {
  // Aligned with window snapshots n-N+1..n; NaN where the stretched
  // support does not cover the query range.
  std::vector<double> values;
  std::size_t valid_count = 0;
};

// Places the last m_len samples of row_f0 at ranges r_i*(f1/f0)^(1/beta)
// and interpolates back onto the window ranges. Throws
// insufficient_coverage when fewer than two window points are covered.
StretchedRow stretch_and_interp(std::span<const double> row_f0,
                                const RangeAxis& axis, double f0_hz,
                                double f1_hz, double beta,
                                std::size_t window_len, std::size_t m_len);

// Sum over tone pairs (f0 < f1) of the cross-correlation coefficient
// between the stretched f0 row and the f1 row, each demeaned over the
// covered window points and weighted by its coverage. Throws
// no_valid_pairs when no pair has enough overlap and variance.
double objective_g(std::span<const std::vector<double>> rows,
                   std::span<const double> tones_hz, const RangeAxis& axis,
                   double beta, std::size_t window_len,
                   std::size_t stretch_cap, double min_overlap);

struct ObjectiveSample {
  double x = 0.0;
  double g = 0.0;
  bool valid = false;
};

struct RangeEstimate {
  double range_m = 0.0;
  double objective = 0.0;
  std::vector<ObjectiveSample> curve;
};

struct BetaEstimate {
  double beta = 0.0;
  double objective = 0.0;
  std::vector<ObjectiveSample> curve;
};

// Grid argmax over candidate reference ranges of the coverage-weighted
// mean pair correlation; ties break toward the smaller range. Throws
// all_candidates_invalid when the whole grid fails.
RangeEstimate estimate_range(std::span<const std::vector<double>> rows,
                             std::span<const double> z_rdot_mps,
                             double t_delta_s, const WiConfig& cfg,
                             double beta);

// Grid argmax of the same objective over beta at a known reference
// range; ties break toward the smaller beta.
BetaEstimate calibrate_beta(std::span<const std::vector<double>> rows,
                            std::span<const double> z_rdot_mps,
                            double t_delta_s, const WiConfig& cfg,
                            double r_n_known_m);

// One intensity row per requested tone, |p|^2 or decibel if log_intensity.
std::vector<std::vector<double>> make_intensity_rows(
    const waveguide::PressureFieldSeries& series,
    std::span<const double> tones_hz, bool log_intensity);

void write_objective_csv(const std::filesystem::path& path,
                         const std::vector<ObjectiveSample>& curve,
                         const char* x_name);

}  // namespace swnav::wiranging
