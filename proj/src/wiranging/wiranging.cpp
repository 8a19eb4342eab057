#include "wiranging/wiranging.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace swnav::wiranging {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Sorted views of one reference-anchored range axis. Sorting orders are
// invariant to a common additive shift, so a whole candidate grid reuses
// one plan.
struct StretchPlan {
  std::vector<double> base;
  std::vector<std::size_t> hist;  // last m_len indices, ascending base
  std::vector<std::size_t> win;   // window indices, ascending base
  double base_min = 0.0;          // over the full axis
};

StretchPlan make_plan(std::span<const double> base, std::size_t window_len,
                      std::size_t m_len) {
  StretchPlan plan;
  plan.base.assign(base.begin(), base.end());
  const std::size_t count = base.size();
  plan.hist.resize(m_len);
  std::iota(plan.hist.begin(), plan.hist.end(), count - m_len);
  plan.win.resize(window_len);
  std::iota(plan.win.begin(), plan.win.end(), count - window_len);
  auto by_base = [&](std::size_t a, std::size_t b) {
    return base[a] < base[b];
  };
  std::sort(plan.hist.begin(), plan.hist.end(), by_base);
  std::sort(plan.win.begin(), plan.win.end(), by_base);
  plan.base_min = *std::min_element(base.begin(), base.end());
  return plan;
}

// Interpolates the stretched f0 row at each window range. Emits one value
// per window index in sorted-range order through `sink(sorted_pos, j)`;
// uncovered queries are skipped.
template <typename Sink>
void stretched_values(const StretchPlan& plan, std::span<const double> row0,
                      double stretch, double shift, Sink&& sink) {
  const auto& h = plan.hist;
  auto x_at = [&](std::size_t u) {
    return stretch * (plan.base[h[u]] + shift);
  };
  const double x_lo = x_at(0), x_hi = x_at(h.size() - 1);
  std::size_t u = 0;
  for (std::size_t t = 0; t < plan.win.size(); ++t) {
    const double q = plan.base[plan.win[t]] + shift;
    if (q < x_lo) continue;
    if (q > x_hi) break;
    while (u + 1 < h.size() && x_at(u + 1) < q) ++u;
    const double x0 = x_at(u), x1 = x_at(u + 1 < h.size() ? u + 1 : u);
    const double dx = x1 - x0;
    const double w = dx > 0.0 ? (q - x0) / dx : 0.0;
    const double j = row0[h[u]] * (1.0 - w) +
                     row0[h[u + 1 < h.size() ? u + 1 : u]] * w;
    sink(t, j);
  }
}

// Cross-correlation coefficient of the stretched f0 row against the f1
// row over the covered window points. False when overlap or variance is
// too small.
bool pair_correlation(const StretchPlan& plan, std::span<const double> row0,
                      std::span<const double> row1, double stretch,
                      double shift, double& rho, std::size_t& covered) {
  double sj = 0.0, si = 0.0, sjj = 0.0, sii = 0.0, sji = 0.0;
  std::size_t k = 0;
  stretched_values(plan, row0, stretch, shift,
                   [&](std::size_t t, double j) {
                     const double i = row1[plan.win[t]];
                     sj += j;
                     si += i;
                     sjj += j * j;
                     sii += i * i;
                     sji += j * i;
                     ++k;
                   });
  covered = k;
  if (k < 2) return false;
  const double kk = static_cast<double>(k);
  const double cjj = sjj - sj * sj / kk;
  const double cii = sii - si * si / kk;
  if (!(cjj > 0.0) || !(cii > 0.0)) return false;
  const double cji = sji - sj * si / kk;
  rho = std::clamp(cji / std::sqrt(cjj * cii), -1.0, 1.0);
  return true;
}

// Coverage weight for one pair: zero until min_overlap of the window is
// covered, then linear up to 1 at full coverage. Keeping the weight
// continuous in the covered count stops pairs from snapping in and out
// across a candidate grid and faking objective peaks.
double coverage_weight(std::size_t covered, std::size_t window_len,
                       double min_overlap) {
  const double frac =
      static_cast<double>(covered) / static_cast<double>(window_len);
  if (frac >= 1.0) return 1.0;
  if (min_overlap >= 1.0) return 0.0;
  return std::clamp((frac - min_overlap) / (1.0 - min_overlap), 0.0, 1.0);
}

struct TonePair {
  std::size_t lo, hi;  // row indices with tones_hz[lo] < tones_hz[hi]
  double ratio;        // f_hi / f_lo
};

std::vector<TonePair> make_pairs(std::span<const double> tones_hz) {
  std::vector<std::size_t> order(tones_hz.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tones_hz[a] < tones_hz[b];
  });
  std::vector<TonePair> pairs;
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b)
      pairs.push_back({order[a], order[b],
                       tones_hz[order[b]] / tones_hz[order[a]]});
  return pairs;
}

std::size_t effective_m(std::size_t count, std::size_t window_len,
                        std::size_t cap) {
  if (cap == 0) return count;
  return std::max(window_len, std::min(cap, count));
}

struct CandidateScore {
  double weighted_sum = 0.0;
  double total_weight = 0.0;
  std::size_t used = 0;

  // The weighted mean cancels the coverage envelope that would otherwise
  // tilt an argmax across candidates with unequal overlap.
  double mean() const { return weighted_sum / total_weight; }
};

CandidateScore candidate_objective(const StretchPlan& plan,
                                   std::span<const std::vector<double>> rows,
                                   const std::vector<TonePair>& pairs,
                                   double beta, double shift,
                                   std::size_t window_len,
                                   double min_overlap) {
  CandidateScore score;
  for (const auto& pair : pairs) {
    const double stretch = std::pow(pair.ratio, 1.0 / beta);
    double rho = 0.0;
    std::size_t covered = 0;
    if (!pair_correlation(plan, rows[pair.lo], rows[pair.hi], stretch,
                          shift, rho, covered))
      continue;
    const double w = coverage_weight(covered, window_len, min_overlap);
    if (w > 0.0) {
      score.weighted_sum += w * rho;
      score.total_weight += w;
      ++score.used;
    }
  }
  return score;
}

void check_rows(std::span<const std::vector<double>> rows,
                std::size_t tone_count, std::size_t count) {
  if (rows.size() != tone_count)
    throw Error(ErrorKind::config, "one intensity row per tone required");
  for (const auto& row : rows)
    if (row.size() != count)
      throw Error(ErrorKind::config,
                  "intensity row length does not match the series");
}

}  // namespace

void WiConfig::validate() const {
  if (tones_hz.size() < 2)
    throw Error(ErrorKind::config, "at least two tones required");
  for (double f : tones_hz)
    if (!(f > 0.0)) throw Error(ErrorKind::config, "tones must be positive");
  auto sorted = tones_hz;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorKind::config, "tones must be distinct");
  if (window_len < 8)
    throw Error(ErrorKind::config, "window_len must be at least 8");
  if (stretch_cap != 0 && stretch_cap < window_len)
    throw Error(ErrorKind::config, "stretch_cap must be 0 or >= window_len");
  if (!(beta_min > 0.0) || !(beta_max >= beta_min) || !(beta_step > 0.0))
    throw Error(ErrorKind::config, "invalid beta grid");
  if (!(range_min_m > 0.0) || !(range_max_m >= range_min_m) ||
      !(range_step_m > 0.0))
    throw Error(ErrorKind::config, "invalid range grid");
  if (!(min_overlap > 0.0) || min_overlap > 1.0)
    throw Error(ErrorKind::config, "min_overlap must lie in (0, 1]");
  if (!(min_total_weight > 0.0))
    throw Error(ErrorKind::config, "min_total_weight must be positive");
}

RangeAxis build_range_axis(std::span<const double> z_rdot_mps, double r_n_m,
                           double t_delta_s) {
  if (!(t_delta_s > 0.0))
    throw Error(ErrorKind::config, "t_delta must be positive");
  for (double z : z_rdot_mps)
    if (!std::isfinite(z))
      throw Error(ErrorKind::config, "range rates must be finite");
  RangeAxis axis;
  axis.r_m.resize(z_rdot_mps.size() + 1);
  axis.r_m.back() = r_n_m;
  for (std::size_t i = z_rdot_mps.size(); i-- > 0;)
    axis.r_m[i] = axis.r_m[i + 1] - z_rdot_mps[i] * t_delta_s;
  for (double r : axis.r_m)
    if (!(r > 0.0))
      throw Error(ErrorKind::non_positive_range,
                  "range axis reaches a non-positive range");
  return axis;
}

StretchedRow stretch_and_interp(std::span<const double> row_f0,
                                const RangeAxis& axis, double f0_hz,
                                double f1_hz, double beta,
                                std::size_t window_len, std::size_t m_len) {
  if (!(f0_hz > 0.0) || !(f1_hz > f0_hz))
    throw Error(ErrorKind::config, "tone pair must satisfy 0 < f0 < f1");
  if (!(beta > 0.0)) throw Error(ErrorKind::config, "beta must be positive");
  const std::size_t count = axis.r_m.size();
  if (row_f0.size() != count)
    throw Error(ErrorKind::config, "row length does not match the axis");
  if (window_len < 2 || window_len > count)
    throw Error(ErrorKind::config, "window does not fit the axis");
  if (m_len < window_len || m_len > count)
    throw Error(ErrorKind::config, "m_len must lie in [window_len, count]");

  const auto plan = make_plan(axis.r_m, window_len, m_len);
  const double stretch = std::pow(f1_hz / f0_hz, 1.0 / beta);

  StretchedRow out;
  out.values.assign(window_len, kNan);
  const std::size_t w_begin = count - window_len;
  stretched_values(plan, row_f0, stretch, 0.0, [&](std::size_t t, double j) {
    out.values[plan.win[t] - w_begin] = j;
    ++out.valid_count;
  });
  if (out.valid_count < 2)
    throw Error(ErrorKind::insufficient_coverage,
                "stretched row covers fewer than two window points");
  return out;
}

double objective_g(std::span<const std::vector<double>> rows,
                   std::span<const double> tones_hz, const RangeAxis& axis,
                   double beta, std::size_t window_len,
                   std::size_t stretch_cap, double min_overlap) {
  if (!(beta > 0.0)) throw Error(ErrorKind::config, "beta must be positive");
  const std::size_t count = axis.r_m.size();
  check_rows(rows, tones_hz.size(), count);
  if (window_len < 2 || window_len > count)
    throw Error(ErrorKind::config, "window does not fit the axis");

  const auto plan = make_plan(
      axis.r_m, window_len, effective_m(count, window_len, stretch_cap));
  const auto pairs = make_pairs(tones_hz);
  const auto score = candidate_objective(plan, rows, pairs, beta, 0.0,
                                         window_len, min_overlap);
  if (score.used == 0)
    throw Error(ErrorKind::no_valid_pairs,
                "no tone pair has enough overlap and variance");
  return score.weighted_sum;
}

RangeEstimate estimate_range(std::span<const std::vector<double>> rows,
                             std::span<const double> z_rdot_mps,
                             double t_delta_s, const WiConfig& cfg,
                             double beta) {
  cfg.validate();
  if (!(beta > 0.0)) throw Error(ErrorKind::config, "beta must be positive");
  if (!(t_delta_s > 0.0))
    throw Error(ErrorKind::config, "t_delta must be positive");
  const std::size_t count = z_rdot_mps.size() + 1;
  check_rows(rows, cfg.tones_hz.size(), count);
  if (count < cfg.window_len)
    throw Error(ErrorKind::too_few_samples,
                "history shorter than the correlation window");

  // Anchor offsets at zero reference; a candidate only shifts the axis.
  std::vector<double> base(count, 0.0);
  for (std::size_t i = count - 1; i-- > 0;) {
    if (!std::isfinite(z_rdot_mps[i]))
      throw Error(ErrorKind::config, "range rates must be finite");
    base[i] = base[i + 1] - z_rdot_mps[i] * t_delta_s;
  }
  const auto plan = make_plan(
      base, cfg.window_len, effective_m(count, cfg.window_len,
                                        cfg.stretch_cap));
  const auto pairs = make_pairs(cfg.tones_hz);

  RangeEstimate out;
  bool found = false;
  for (std::size_t k = 0;; ++k) {
    const double c = cfg.range_min_m + static_cast<double>(k) *
                                           cfg.range_step_m;
    if (c > cfg.range_max_m + 1e-9 * cfg.range_step_m) break;
    ObjectiveSample sample;
    sample.x = c;
    sample.g = kNan;
    if (plan.base_min + c > 0.0) {
      const auto score = candidate_objective(plan, rows, pairs, beta, c,
                                             cfg.window_len,
                                             cfg.min_overlap);
      if (score.total_weight >= cfg.min_total_weight) {
        sample.g = score.mean();
        sample.valid = true;
        if (!found || sample.g > out.objective) {
          found = true;
          out.objective = sample.g;
          out.range_m = c;
        }
      }
    }
    out.curve.push_back(sample);
  }
  if (!found)
    throw Error(ErrorKind::all_candidates_invalid,
                "no reference range candidate is usable");
  return out;
}

BetaEstimate calibrate_beta(std::span<const std::vector<double>> rows,
                            std::span<const double> z_rdot_mps,
                            double t_delta_s, const WiConfig& cfg,
                            double r_n_known_m) {
  cfg.validate();
  if (!(r_n_known_m > 0.0))
    throw Error(ErrorKind::config, "known range must be positive");
  const std::size_t count = z_rdot_mps.size() + 1;
  check_rows(rows, cfg.tones_hz.size(), count);
  if (count < cfg.window_len)
    throw Error(ErrorKind::too_few_samples,
                "history shorter than the correlation window");

  RangeAxis axis;
  try {
    axis = build_range_axis(z_rdot_mps, r_n_known_m, t_delta_s);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::non_positive_range)
      throw Error(ErrorKind::all_candidates_invalid,
                  "axis at the known range is non-positive");
    throw;
  }
  const auto plan = make_plan(
      axis.r_m, cfg.window_len, effective_m(count, cfg.window_len,
                                            cfg.stretch_cap));
  const auto pairs = make_pairs(cfg.tones_hz);

  BetaEstimate out;
  bool found = false;
  for (std::size_t k = 0;; ++k) {
    const double b = cfg.beta_min + static_cast<double>(k) * cfg.beta_step;
    if (b > cfg.beta_max + 1e-9 * cfg.beta_step) break;
    ObjectiveSample sample;
    sample.x = b;
    sample.g = kNan;
    const auto score = candidate_objective(plan, rows, pairs, b, 0.0,
                                           cfg.window_len, cfg.min_overlap);
    if (score.total_weight >= cfg.min_total_weight) {
      sample.g = score.mean();
      sample.valid = true;
      if (!found || sample.g > out.objective) {
        found = true;
        out.objective = sample.g;
        out.beta = b;
      }
    }
    out.curve.push_back(sample);
  }
  if (!found)
    throw Error(ErrorKind::all_candidates_invalid,
                "no beta candidate is usable");
  return out;
}

std::vector<std::vector<double>> make_intensity_rows(
    const waveguide::PressureFieldSeries& series,
    std::span<const double> tones_hz, bool log_intensity) {
  std::vector<std::size_t> indices;
  for (double f : tones_hz) {
    std::size_t found = series.tones_hz.size();
    for (std::size_t t = 0; t < series.tones_hz.size(); ++t)
      if (std::abs(series.tones_hz[t] - f) < 1e-6) found = t;
    if (found == series.tones_hz.size())
      throw Error(ErrorKind::config,
                  "requested tone not present in the series");
    indices.push_back(found);
  }
  std::vector<std::vector<double>> rows(indices.size());
  for (std::size_t t = 0; t < indices.size(); ++t) {
    rows[t].resize(series.snapshot_count());
    for (std::size_t i = 0; i < series.snapshot_count(); ++i) {
      const double v = std::norm(series.samples[i][indices[t]]);
      rows[t][i] = log_intensity ? 10.0 * std::log10(v + 1e-30) : v;
    }
  }
  return rows;
}

void write_objective_csv(const std::filesystem::path& path,
                         const std::vector<ObjectiveSample>& curve,
                         const char* x_name) {
  CsvWriter csv(path);
  csv.header({x_name, "g", "valid"});
  for (const auto& s : curve)
    csv.row({s.x, s.g, s.valid ? 1.0 : 0.0});
}

}  // namespace swnav::wiranging
