#include "harness/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/version.hpp"
#include "wiranging/wiranging.hpp"

namespace swnav::harness {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr double kMetricsInterval_s = 30.0;

[[noreturn]] void rethrow_with_stage(const Error& e, const char* stage) {
  throw Error(e.kind(), std::string(stage) + ": " + e.what());
}

std::vector<std::vector<double>> slice_rows(
    const std::vector<std::vector<double>>& rows, std::size_t len) {
  std::vector<std::vector<double>> out(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t)
    out[t].assign(rows[t].begin(), rows[t].begin() + len);
  return out;
}

}  // namespace

TruthSeries simulate_truth(const config::ScenarioConfig& cfg) {
  cfg.validate();
  TruthSeries truth;
  truth.t_delta_s = cfg.snapshot_interval_s;
  const std::size_t n_snap = cfg.snapshot_count();
  truth.auv.resize(n_snap);
  truth.soo.resize(n_snap);
  truth.acoustic.resize(n_snap);
  for (std::size_t n = 0; n < n_snap; ++n) {
    const double t = static_cast<double>(n) * cfg.snapshot_interval_s;
    auto& s = truth.auv[n];
    s.position_m = {cfg.auv_initial.position_m[0] +
                        t * cfg.auv_initial.velocity_mps[0],
                    cfg.auv_initial.position_m[1] +
                        t * cfg.auv_initial.velocity_mps[1]};
    s.velocity_mps = cfg.auv_initial.velocity_mps;
    s.heading_deg = navfilter::wrap_heading_deg(cfg.auv_initial.heading_deg);
    truth.soo[n] = cfg.soo.position_at(t);

    const double ux = s.position_m[0] - truth.soo[n][0];
    const double uy = s.position_m[1] - truth.soo[n][1];
    const double rvx = s.velocity_mps[0] - cfg.soo.velocity_mps[0];
    const double rvy = s.velocity_mps[1] - cfg.soo.velocity_mps[1];
    const double d = std::hypot(ux, uy);
    truth.acoustic[n].range_m = d;
    truth.acoustic[n].range_rate_mps =
        d > 0.0 ? (ux * rvx + uy * rvy) / d : 0.0;
  }
  return truth;
}

RunResult run_scenario(const config::ScenarioConfig& cfg, std::uint64_t seed,
                       const RunOptions& opts) {
  if (opts.range_fix_interval == 0)
    throw Error(ErrorKind::config, "range_fix_interval must be at least 1");

  RunResult result;
  result.seed = seed;
  result.truth = simulate_truth(cfg);
  const std::size_t n_snap = result.truth.size();
  const double t_delta = cfg.snapshot_interval_s;

  Rng root(seed);
  const std::uint64_t field_seed = root.stream(1).next_u64();
  const std::uint64_t filter_seed = root.stream(2).next_u64();
  Rng meas = root.stream(3);

  const auto wi = cfg.wiranging_resolved();
  const bool acoustic = opts.range_source == RangeSource::acoustic;

  std::vector<std::vector<double>> rows;
  if (acoustic) {
    try {
      waveguide::GeometrySeries geom;
      geom.source_depth_m = cfg.source_depth_m;
      geom.receiver_depth_m = cfg.receiver_depth_m;
      geom.snapshot_interval_s = t_delta;
      geom.truth = result.truth.acoustic;
      const auto series = waveguide::synthesize_series(
          cfg.environment, geom, cfg.tones_hz, cfg.snr_db, field_seed);
      rows = wiranging::make_intensity_rows(series, wi.tones_hz,
                                            wi.log_intensity);
      result.track = rangerate::compute_track(series, cfg.rangerate);
    } catch (const Error& e) {
      rethrow_with_stage(e, "acoustic synthesis");
    }
  }

  // Ranging warmup: the correlation window must fit entirely inside
  // snapshots with measured rate centers, and the real-time rate needs a
  // full prediction history.
  const std::size_t half = cfg.rangerate.segment_half_len;
  const std::size_t first_possible =
      std::max(wi.window_len - 1 + half, 3 * half);
  auto fix_scheduled = [&](std::size_t n) {
    if (opts.range_source == RangeSource::none) return false;
    if (n < first_possible || n >= n_snap) return false;
    return (n - first_possible) % opts.range_fix_interval == 0;
  };

  double beta = cfg.beta.value_or(0.0);
  if (acoustic && !cfg.beta) {
    try {
      const auto z = rangerate::realtime_rate_series(result.track,
                                                     first_possible);
      const auto sliced = slice_rows(rows, first_possible + 1);
      result.calibration = wiranging::calibrate_beta(
          sliced, z, t_delta, wi,
          result.truth.acoustic[first_possible].range_m);
      beta = result.calibration.beta;
      result.beta_was_calibrated = true;
    } catch (const Error& e) {
      rethrow_with_stage(e, "invariant calibration");
    }
  }
  result.beta_used = beta;

  // The deployment-time dead-reckoned position is itself a draw from the
  // prior, so the particle cloud is centered off truth by one such draw.
  Rng prior_rng = root.stream(4);
  navfilter::AuvState prior_mean = result.truth.auv[0];
  prior_mean.position_m[0] += prior_rng.normal(0.0, cfg.prior.position_std_m);
  prior_mean.position_m[1] += prior_rng.normal(0.0, cfg.prior.position_std_m);
  navfilter::ParticleFilter pf(cfg.particle_count, prior_mean, cfg.prior,
                               filter_seed);
  const auto motion = cfg.motion_model();

  result.trajectory.resize(n_snap);
  {
    auto& row0 = result.trajectory[0];
    row0.time_s = 0.0;
    row0.estimate = pf.mmse_estimate();
    row0.position_cov = pf.position_covariance();
    row0.truth_position_m = result.truth.auv[0].position_m;
    row0.has_range_fix = false;
  }

  for (std::size_t n = 1; n < n_snap; ++n) {
    try {
      pf.predict(motion);
    } catch (const Error& e) {
      rethrow_with_stage(e, "filter predict");
    }

    const auto& tr = result.truth.auv[n];
    const double th = tr.heading_deg * kDegToRad;
    const double c = std::cos(th), s = std::sin(th);
    navfilter::MeasurementBundle z;
    z.body_velocity_mps = {
        c * tr.velocity_mps[0] + s * tr.velocity_mps[1] +
            meas.normal(0.0, cfg.noise.velocity_std_mps),
        -s * tr.velocity_mps[0] + c * tr.velocity_mps[1] +
            meas.normal(0.0, cfg.noise.velocity_std_mps)};
    z.compass_deg = navfilter::wrap_heading_deg(
        tr.heading_deg + meas.normal(0.0, cfg.noise.compass_std_deg));
    z.soo_position_m = result.truth.soo[n];

    if (fix_scheduled(n)) {
      if (opts.range_source == RangeSource::truth) {
        z.range_m = result.truth.acoustic[n].range_m;
      } else {
        try {
          const auto zr = rangerate::realtime_rate_series(result.track, n);
          const auto sliced = slice_rows(rows, n + 1);
          auto est = wiranging::estimate_range(sliced, zr, t_delta, wi, beta);
          z.range_m = est.range_m;
          result.fixes.push_back({n, static_cast<double>(n) * t_delta,
                                  est.range_m,
                                  result.truth.acoustic[n].range_m,
                                  est.objective});
          if (!result.has_first_fix()) {
            result.first_fix_snapshot = n;
            result.first_fix_scan = std::move(est);
          }
        } catch (const Error&) {
          ++result.failed_fixes;
        }
      }
      if (z.range_m && opts.range_source == RangeSource::truth &&
          !result.has_first_fix()) {
        result.first_fix_snapshot = n;
      }
    }

    try {
      pf.update(z, cfg.noise);
      pf.resample_and_roughen(0.5, cfg.roughening_std_m);
    } catch (const Error& e) {
      rethrow_with_stage(e, "filter update");
    }

    auto& row = result.trajectory[n];
    row.time_s = static_cast<double>(n) * t_delta;
    row.estimate = pf.mmse_estimate();
    row.position_cov = pf.position_covariance();
    row.truth_position_m = tr.position_m;
    row.has_range_fix = z.range_m.has_value();
  }

  // Error samples on the metrics grid.
  const std::size_t stride = static_cast<std::size_t>(
      std::max(1.0, std::round(kMetricsInterval_s / t_delta)));
  std::size_t last_fix = 0;
  bool any_fix = false;
  std::size_t fix_cursor = 0;
  for (std::size_t n = 0; n < n_snap; n += stride) {
    while (fix_cursor < result.fixes.size() &&
           result.fixes[fix_cursor].snapshot <= n) {
      last_fix = fix_cursor;
      any_fix = true;
      ++fix_cursor;
    }
    MetricsRow m;
    m.time_s = static_cast<double>(n) * t_delta;
    const auto& row = result.trajectory[n];
    m.position_error_m =
        std::hypot(row.estimate.position_m[0] - row.truth_position_m[0],
                   row.estimate.position_m[1] - row.truth_position_m[1]);
    m.cov_trace_m2 = row.position_cov[0] + row.position_cov[2];
    if (acoustic && n >= rangerate::first_realtime_index(result.track) &&
        n <= result.track.last_center + half)
      m.range_rate_error_mps =
          rangerate::realtime_estimate(result.track, n) -
          result.truth.acoustic[n].range_rate_mps;
    if (any_fix)
      m.range_error_m =
          result.fixes[last_fix].estimate_m - result.fixes[last_fix].truth_m;
    result.metrics.push_back(m);
  }
  return result;
}

std::size_t worker_count_from_env() {
  const char* env = std::getenv("SWNAV_WORKERS");
  if (!env) return 1;
  const long v = std::strtol(env, nullptr, 10);
  if (v < 1) return 1;
  return static_cast<std::size_t>(v);
}

MonteCarloResult aggregate_runs(const std::vector<RunResult>& runs) {
  MonteCarloResult agg;
  agg.trials_run = runs.size();
  if (runs.empty()) return agg;

  const std::size_t n_rows = runs.front().metrics.size();
  double rate_sq = 0.0, range_sq = 0.0;
  std::size_t rate_n = 0, range_n = 0;
  for (std::size_t i = 0; i < n_rows; ++i) {
    AggregateRow row;
    row.time_s = runs.front().metrics[i].time_s;
    double pos_sq = 0.0, cov_sum = 0.0, r_sq = 0.0, g_sq = 0.0;
    std::size_t r_cnt = 0, g_cnt = 0;
    for (const auto& run : runs) {
      const auto& m = run.metrics[i];
      pos_sq += m.position_error_m * m.position_error_m;
      cov_sum += m.cov_trace_m2;
      if (std::isfinite(m.range_rate_error_mps)) {
        r_sq += m.range_rate_error_mps * m.range_rate_error_mps;
        ++r_cnt;
      }
      if (std::isfinite(m.range_error_m)) {
        g_sq += m.range_error_m * m.range_error_m;
        ++g_cnt;
      }
    }
    row.trials = runs.size();
    row.position_rmse_m = std::sqrt(pos_sq / static_cast<double>(runs.size()));
    row.mean_cov_trace_m2 = cov_sum / static_cast<double>(runs.size());
    if (r_cnt > 0) row.range_rate_rmse_mps = std::sqrt(r_sq / r_cnt);
    if (g_cnt > 0) row.range_rmse_m = std::sqrt(g_sq / g_cnt);
    rate_sq += r_sq;
    rate_n += r_cnt;
    range_sq += g_sq;
    range_n += g_cnt;
    agg.rows.push_back(row);
  }
  if (rate_n > 0) agg.range_rate_rmse_mps = std::sqrt(rate_sq / rate_n);
  if (range_n > 0) agg.range_rmse_m = std::sqrt(range_sq / range_n);
  for (const auto& run : runs)
    if (run.has_first_fix())
      agg.first_fix_times_s.push_back(
          static_cast<double>(run.first_fix_snapshot) * run.truth.t_delta_s);
  return agg;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial) {
  return Rng(base_seed).stream(0xA5).stream(trial).next_u64();
}

MonteCarloResult monte_carlo(const config::ScenarioConfig& cfg,
                             std::size_t trials, const RunOptions& opts,
                             std::size_t workers) {
  if (trials == 0)
    throw Error(ErrorKind::config, "trials must be at least 1");
  if (workers == 0) workers = worker_count_from_env();
  workers = std::min(workers, trials);

  std::vector<std::uint64_t> seeds(trials);
  for (std::size_t i = 0; i < trials; ++i)
    seeds[i] = trial_seed(cfg.seed, i);

  std::vector<RunResult> runs(trials);
  std::vector<std::string> errors(trials);
  std::vector<bool> ok(trials, false);
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        runs[i] = run_scenario(cfg, seeds[i], opts);
        ok[i] = true;
      } catch (const Error& e) {
        errors[i] = "trial " + std::to_string(i) + ": " + e.what();
      } catch (const std::exception& e) {
        errors[i] = "trial " + std::to_string(i) + ": " + e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<RunResult> good;
  MonteCarloResult agg;
  for (std::size_t i = 0; i < trials; ++i) {
    if (ok[i])
      good.push_back(std::move(runs[i]));
    else
      agg.trial_errors.push_back(errors[i]);
  }
  if (good.empty())
    throw Error(ErrorKind::non_convergence,
                "every trial failed; first: " + agg.trial_errors.front());
  auto computed = aggregate_runs(good);
  computed.trial_errors = std::move(agg.trial_errors);
  return computed;
}

namespace {

nlohmann::ordered_json config_echo(const config::ScenarioConfig& cfg) {
  return nlohmann::ordered_json::parse(config::scenario_to_json_text(cfg));
}

void write_json(const std::filesystem::path& path,
                const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::io, "cannot write: " + path.string());
  out << j.dump(2) << "\n";
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsRow>& rows) {
  CsvWriter csv(path);
  csv.header({"time_s", "position_error_m", "cov_trace_m2",
              "range_rate_error_mps", "range_error_m"});
  for (const auto& m : rows)
    csv.row({m.time_s, m.position_error_m, m.cov_trace_m2,
             m.range_rate_error_mps, m.range_error_m});
}

}  // namespace

void write_run_outputs(const std::filesystem::path& dir,
                       const config::ScenarioConfig& cfg,
                       const RunResult& result) {
  std::filesystem::create_directories(dir / "objective_curves");

  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["seed"] = result.seed;
  j["beta_used"] = result.beta_used;
  j["beta_was_calibrated"] = result.beta_was_calibrated;
  j["first_fix_time_s"] =
      result.has_first_fix()
          ? nlohmann::ordered_json(static_cast<double>(
                result.first_fix_snapshot) * result.truth.t_delta_s)
          : nlohmann::ordered_json(nullptr);
  j["failed_fixes"] = result.failed_fixes;
  j["config"] = config_echo(cfg);
  write_json(dir / "run.json", j);

  navfilter::write_trajectory_csv(dir / "trajectory.csv", result.trajectory);
  if (result.track.smoothed.empty()) {
    CsvWriter csv(dir / "rangerate.csv");
    csv.header({"time_s", "smoothed_mps", "truth_mps"});
  } else {
    rangerate::write_rangerate_csv(dir / "rangerate.csv", result.track,
                                   result.truth.acoustic);
  }

  {
    CsvWriter csv(dir / "range.csv");
    csv.header({"snapshot", "time_s", "estimate_m", "truth_m", "objective"});
    for (const auto& f : result.fixes)
      csv.row({static_cast<double>(f.snapshot), f.time_s, f.estimate_m,
               f.truth_m, f.objective});
  }

  write_metrics_csv(dir / "metrics.csv", result.metrics);

  if (!result.calibration.curve.empty())
    wiranging::write_objective_csv(
        dir / "objective_curves" / "beta_calibration.csv",
        result.calibration.curve, "beta");
  if (!result.first_fix_scan.curve.empty())
    wiranging::write_objective_csv(
        dir / "objective_curves" / "range_first_fix.csv",
        result.first_fix_scan.curve, "range_m");
}

void write_monte_carlo_outputs(const std::filesystem::path& dir,
                               const config::ScenarioConfig& cfg,
                               const MonteCarloResult& result) {
  std::filesystem::create_directories(dir);

  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["trials_run"] = result.trials_run;
  j["first_fix_times_s"] = result.first_fix_times_s;
  j["range_rate_rmse_mps"] = result.range_rate_rmse_mps;
  j["range_rmse_m"] = result.range_rmse_m;
  j["trial_errors"] = result.trial_errors;
  j["config"] = config_echo(cfg);
  write_json(dir / "run.json", j);

  CsvWriter csv(dir / "metrics.csv");
  csv.header({"time_s", "position_rmse_m", "mean_cov_trace_m2",
              "range_rate_rmse_mps", "range_rmse_m", "trials"});
  for (const auto& r : result.rows)
    csv.row({r.time_s, r.position_rmse_m, r.mean_cov_trace_m2,
             r.range_rate_rmse_mps, r.range_rmse_m,
             static_cast<double>(r.trials)});
}

}  // namespace swnav::harness
