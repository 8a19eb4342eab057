#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "config/config.hpp"
#include "navfilter/navfilter.hpp"
#include "rangerate/rangerate.hpp"
#include "waveguide/waveguide.hpp"

namespace swnav::harness {

// Straight-line truth for both craft, sampled every snapshot interval.
struct TruthSeries {
  double t_delta_s = 1.0;
  std::vector<navfilter::AuvState> auv;
  std::vector<std::array<double, 2>> soo;
  // Horizontal range and range rate between AUV and SOO per snapshot.
  std::vector<waveguide::TruthSample> acoustic;

  std::size_t size() const { return auv.size(); }
};

TruthSeries simulate_truth(const config::ScenarioConfig& cfg);

enum class RangeSource {
  acoustic,  // waveguide-invariant range estimates
  truth,     // exact truth ranges, for filter sanity checks
  none,      // dead-reckoning only
};

struct RunOptions {
  RangeSource range_source = RangeSource::acoustic;
  // Snapshots between acoustic range fixes once ranging is warmed up.
  std::size_t range_fix_interval = 5;
};

struct RangeFix {
  std::size_t snapshot = 0;
  double time_s = 0.0;
  double estimate_m = 0.0;
  double truth_m = 0.0;
  double objective = 0.0;
};

// Per-run error samples on the 30 s grid; RMSE forms across trials.
struct MetricsRow {
  double time_s = 0.0;
  double position_error_m = 0.0;
  double cov_trace_m2 = 0.0;
  // NaN where the pipeline has not produced the quantity yet.
  double range_rate_error_mps = std::numeric_limits<double>::quiet_NaN();
  double range_error_m = std::numeric_limits<double>::quiet_NaN();
};

struct RunResult {
  std::uint64_t seed = 0;
  TruthSeries truth;
  rangerate::RangeRateTrack track;
  std::vector<RangeFix> fixes;
  double beta_used = 0.0;
  bool beta_was_calibrated = false;
  // Snapshot index of the first acoustic fix; size_t(-1) when none.
  std::size_t first_fix_snapshot = static_cast<std::size_t>(-1);
  // Scheduled fixes that errored out and were skipped.
  std::size_t failed_fixes = 0;
  std::vector<navfilter::TrajectoryRow> trajectory;
  std::vector<MetricsRow> metrics;
  wiranging::BetaEstimate calibration;      // curve empty unless calibrated
  wiranging::RangeEstimate first_fix_scan;  // curve empty without a fix

  bool has_first_fix() const {
    return first_fix_snapshot != static_cast<std::size_t>(-1);
  }
};

// Full pipeline: synthesize tonal series, range-rate track, range fixes
// gated on warmup, particle-filter fusion. Deterministic per (cfg, seed).
RunResult run_scenario(const config::ScenarioConfig& cfg, std::uint64_t seed,
                       const RunOptions& opts = {});

struct AggregateRow {
  double time_s = 0.0;
  double position_rmse_m = 0.0;
  double mean_cov_trace_m2 = 0.0;
  double range_rate_rmse_mps = std::numeric_limits<double>::quiet_NaN();
  double range_rmse_m = std::numeric_limits<double>::quiet_NaN();
  std::size_t trials = 0;
};

struct MonteCarloResult {
  std::vector<AggregateRow> rows;
  std::vector<double> first_fix_times_s;  // one per trial that fixed
  double range_rate_rmse_mps = std::numeric_limits<double>::quiet_NaN();
  double range_rmse_m = std::numeric_limits<double>::quiet_NaN();
  std::size_t trials_run = 0;
  std::vector<std::string> trial_errors;  // "trial 3: ..." for failures
};

// Seed for one Monte-Carlo trial; monte_carlo uses exactly this.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial);

// Trials use seeds derived from (cfg.seed, trial index), so the worker
// count never changes the aggregate. workers = 0 reads SWNAV_WORKERS,
// defaulting to 1.
MonteCarloResult monte_carlo(const config::ScenarioConfig& cfg,
                             std::size_t trials, const RunOptions& opts = {},
                             std::size_t workers = 0);

std::size_t worker_count_from_env();

// Recomputes what the aggregation should be from per-trial results;
// lets tests cross-check monte_carlo against stored runs.
MonteCarloResult aggregate_runs(const std::vector<RunResult>& runs);

// run.json, trajectory.csv, rangerate.csv, range.csv, metrics.csv,
// objective_curves/ under dir (created if missing).
void write_run_outputs(const std::filesystem::path& dir,
                       const config::ScenarioConfig& cfg,
                       const RunResult& result);

// run.json and aggregated metrics.csv for a trial set.
void write_monte_carlo_outputs(const std::filesystem::path& dir,
                               const config::ScenarioConfig& cfg,
                               const MonteCarloResult& result);

}  // namespace swnav::harness
