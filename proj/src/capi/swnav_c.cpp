#include "swnav/swnav.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "config/config.hpp"
#include "core/error.hpp"
#include "core/csv.hpp"
#include "core/rng.hpp"
#include "core/version.hpp"
#include "harness/harness.hpp"
#include "rangerate/rangerate.hpp"
#include "sigproc/sigproc.hpp"
#include "sigproc/wav.hpp"
#include "waveguide/field_io.hpp"
#include "waveguide/waveguide.hpp"
#include "wiranging/wiranging.hpp"

struct swnav_scenario {
  swnav::config::ScenarioConfig cfg;
};

namespace {

namespace fs = std::filesystem;
using swnav::Error;
using swnav::ErrorKind;

void fill_errbuf(char* errbuf, size_t errlen, const char* msg) {
  if (!errbuf || errlen == 0) return;
  std::strncpy(errbuf, msg, errlen - 1);
  errbuf[errlen - 1] = '\0';
}

int status_for(ErrorKind kind) { return kind == ErrorKind::config ? 2 : 1; }

// Runs fn, translating exceptions to the status/errbuf contract.
template <typename Fn>
int guarded(char* errbuf, size_t errlen, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const Error& e) {
    fill_errbuf(errbuf, errlen, e.what());
    return status_for(e.kind());
  } catch (const std::exception& e) {
    fill_errbuf(errbuf, errlen, e.what());
    return 1;
  } catch (...) {
    fill_errbuf(errbuf, errlen, "unknown failure");
    return 1;
  }
}

void require(bool ok, const char* msg) {
  if (!ok) throw Error(ErrorKind::config, msg);
}

// Same field derivation as the navigation run, so one seed names one field
// across every entry point.
std::uint64_t field_seed_for(std::uint64_t seed) {
  return swnav::Rng(seed).stream(1).next_u64();
}

swnav::waveguide::PressureFieldSeries synthesize_field(
    const swnav::config::ScenarioConfig& cfg, std::uint64_t seed) {
  const auto truth = swnav::harness::simulate_truth(cfg);
  swnav::waveguide::GeometrySeries geom;
  geom.source_depth_m = cfg.source_depth_m;
  geom.receiver_depth_m = cfg.receiver_depth_m;
  geom.snapshot_interval_s = cfg.snapshot_interval_s;
  geom.truth = truth.acoustic;
  return swnav::waveguide::synthesize_series(cfg.environment, geom,
                                             cfg.tones_hz, cfg.snr_db,
                                             field_seed_for(seed));
}

swnav::waveguide::PressureFieldSeries load_or_synthesize(
    const swnav::config::ScenarioConfig& cfg, const char* field_path,
    std::uint64_t seed) {
  if (field_path) return swnav::waveguide::read_field(field_path);
  return synthesize_field(cfg, seed);
}

// Empty configured tone set falls back to the series' own tones, which for
// synthesized fields equals the scenario tone set.
swnav::wiranging::WiConfig resolve_wi(
    const swnav::config::ScenarioConfig& cfg,
    const swnav::waveguide::PressureFieldSeries& series) {
  auto wi = cfg.wiranging;
  if (wi.tones_hz.empty())
    wi.tones_hz = cfg.tones_hz.empty() ? series.tones_hz : cfg.tones_hz;
  return wi;
}

struct RangingPrep {
  swnav::waveguide::PressureFieldSeries series;
  swnav::wiranging::WiConfig wi;
  std::vector<std::vector<double>> rows;
  swnav::rangerate::RangeRateTrack track;
  std::size_t first_feasible = 0;
};

RangingPrep prepare_ranging(const swnav::config::ScenarioConfig& cfg,
                            const char* field_path, std::uint64_t seed) {
  RangingPrep prep;
  prep.series = load_or_synthesize(cfg, field_path, seed);
  prep.wi = resolve_wi(cfg, prep.series);
  prep.wi.validate();
  prep.rows = swnav::wiranging::make_intensity_rows(prep.series,
                                                    prep.wi.tones_hz,
                                                    prep.wi.log_intensity);
  prep.track = swnav::rangerate::compute_track(prep.series, cfg.rangerate);
  prep.first_feasible =
      std::max(prep.wi.window_len - 1 + cfg.rangerate.segment_half_len,
               3 * cfg.rangerate.segment_half_len);
  return prep;
}

// snapshot = 0 is "the default position"; otherwise it must be feasible.
std::size_t resolve_snapshot(const RangingPrep& prep, std::size_t snapshot,
                             std::size_t fallback) {
  const std::size_t n_snap = prep.series.snapshot_count();
  if (snapshot == 0) snapshot = fallback;
  require(snapshot < n_snap, "snapshot is past the end of the series");
  require(snapshot >= prep.first_feasible,
          "snapshot is inside the ranging warmup");
  return snapshot;
}

std::vector<std::vector<double>> slice_rows(
    const std::vector<std::vector<double>>& rows, std::size_t len) {
  std::vector<std::vector<double>> out(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t)
    out[t].assign(rows[t].begin(), rows[t].begin() + len);
  return out;
}

swnav::harness::RunOptions parse_run_options(const char* range_source,
                                             size_t range_fix_interval) {
  swnav::harness::RunOptions opts;
  require(range_source != nullptr, "range_source must not be NULL");
  const std::string src = range_source;
  if (src == "acoustic")
    opts.range_source = swnav::harness::RangeSource::acoustic;
  else if (src == "truth")
    opts.range_source = swnav::harness::RangeSource::truth;
  else if (src == "none")
    opts.range_source = swnav::harness::RangeSource::none;
  else
    throw Error(ErrorKind::config,
                "range_source must be acoustic, truth, or none: " + src);
  require(range_fix_interval > 0, "range_fix_interval must be at least 1");
  opts.range_fix_interval = range_fix_interval;
  return opts;
}

void write_objective_under(const char* out_dir, const char* file_name,
                           const std::vector<swnav::wiranging::ObjectiveSample>&
                               curve,
                           const char* x_name) {
  if (!out_dir) return;
  const fs::path dir = fs::path(out_dir) / "objective_curves";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " +
                                   ec.message());
  swnav::wiranging::write_objective_csv(dir / file_name, curve, x_name);
}

char* copy_to_c(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* swnav_version(void) { return swnav::kVersion; }

double swnav_phase_offset_mps(double tone_hz, double t_delta_s,
                              double sound_speed_mps) {
  return swnav::rangerate::phase_offset_mps(tone_hz, t_delta_s,
                                            sound_speed_mps);
}

int swnav_scenario_default(swnav_scenario** out, char* errbuf, size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(out != nullptr, "out must not be NULL");
    *out = new swnav_scenario{swnav::config::default_scenario()};
  });
}

int swnav_scenario_load(const char* path, swnav_scenario** out, char* errbuf,
                        size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(path != nullptr, "path must not be NULL");
    require(out != nullptr, "out must not be NULL");
    *out = new swnav_scenario{swnav::config::load_scenario(path)};
  });
}

int swnav_scenario_parse(const char* json_text, swnav_scenario** out,
                         char* errbuf, size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(json_text != nullptr, "json_text must not be NULL");
    require(out != nullptr, "out must not be NULL");
    *out = new swnav_scenario{
        swnav::config::scenario_from_json_text(json_text)};
  });
}

int swnav_scenario_override(swnav_scenario* sc, const char* assignment,
                            char* errbuf, size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    require(assignment != nullptr, "assignment must not be NULL");
    sc->cfg = swnav::config::apply_overrides(sc->cfg, {assignment});
  });
}

int swnav_scenario_to_json(const swnav_scenario* sc, char** out_text,
                           char* errbuf, size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    require(out_text != nullptr, "out_text must not be NULL");
    *out_text = copy_to_c(swnav::config::scenario_to_json_text(sc->cfg));
  });
}

int swnav_scenario_save(const swnav_scenario* sc, const char* path,
                        char* errbuf, size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    require(path != nullptr, "path must not be NULL");
    swnav::config::save_scenario(path, sc->cfg);
  });
}

uint64_t swnav_scenario_seed(const swnav_scenario* sc) {
  return sc ? sc->cfg.seed : 0;
}

size_t swnav_scenario_trials(const swnav_scenario* sc) {
  return sc ? sc->cfg.trials : 0;
}

void swnav_scenario_free(swnav_scenario* sc) { delete sc; }

void swnav_free_text(char* text) { std::free(text); }

int swnav_simulate_field(const swnav_scenario* sc, uint64_t seed,
                         const char* out_path, char* errbuf, size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    require(out_path != nullptr, "out_path must not be NULL");
    swnav::waveguide::write_field(synthesize_field(sc->cfg, seed), out_path);
  });
}

int swnav_spectrogram(const swnav_scenario* sc, const char* field_path,
                      uint64_t seed, const char* out_csv, char* errbuf,
                      size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    require(out_csv != nullptr, "out_csv must not be NULL");
    const auto series = load_or_synthesize(sc->cfg, field_path, seed);
    const auto wi = resolve_wi(sc->cfg, series);
    const auto rows = swnav::wiranging::make_intensity_rows(
        series, wi.tones_hz, wi.log_intensity);

    swnav::CsvWriter csv(out_csv);
    std::vector<std::string> names{"time_s"};
    for (double f : wi.tones_hz)
      names.push_back("i_" + swnav::format_double(f) + "_hz");
    csv.header(names);
    std::vector<double> line(1 + rows.size());
    for (std::size_t n = 0; n < series.snapshot_count(); ++n) {
      line[0] = static_cast<double>(n) * series.snapshot_interval_s;
      for (std::size_t t = 0; t < rows.size(); ++t) line[1 + t] = rows[t][n];
      csv.row(line);
    }
  });
}

int swnav_wav_spectrogram(const swnav_scenario* sc, const char* wav_path,
                          const char* out_csv, char* errbuf, size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    require(wav_path != nullptr, "wav_path must not be NULL");
    require(out_csv != nullptr, "out_csv must not be NULL");
    const auto wav = swnav::sigproc::load_wav(wav_path);
    auto dft = sc->cfg.dft;
    dft.sample_rate_hz = wav.sample_rate_hz;
    const auto framed =
        swnav::sigproc::frame_and_dft(wav.samples, dft, sc->cfg.tones_hz);
    swnav::sigproc::write_spectrogram_csv(framed.spectrogram, out_csv);
  });
}

int swnav_range_rate(const swnav_scenario* sc, const char* field_path,
                     uint64_t seed, const char* out_dir, char* errbuf,
                     size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    require(out_dir != nullptr, "out_dir must not be NULL");
    const auto series = load_or_synthesize(sc->cfg, field_path, seed);
    const auto track =
        swnav::rangerate::compute_track(series, sc->cfg.rangerate);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
      throw Error(ErrorKind::io, std::string("cannot create ") + out_dir +
                                     ": " + ec.message());
    swnav::rangerate::write_rangerate_csv(fs::path(out_dir) / "rangerate.csv",
                                          track, series.truth);
  });
}

int swnav_calibrate_beta(const swnav_scenario* sc, const char* field_path,
                         uint64_t seed, size_t snapshot, double known_range_m,
                         const char* out_dir, double* out_beta, char* errbuf,
                         size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    const auto prep = prepare_ranging(sc->cfg, field_path, seed);
    const std::size_t n =
        resolve_snapshot(prep, snapshot, prep.first_feasible);
    double known = known_range_m;
    if (!(known > 0.0)) {
      require(prep.series.has_truth(),
              "field has no truth track; pass a known range");
      known = prep.series.truth[n].range_m;
    }
    const auto z = swnav::rangerate::realtime_rate_series(prep.track, n);
    const auto cal = swnav::wiranging::calibrate_beta(
        slice_rows(prep.rows, n + 1), z, prep.series.snapshot_interval_s,
        prep.wi, known);
    write_objective_under(out_dir, "beta_calibration.csv", cal.curve, "beta");
    if (out_beta) *out_beta = cal.beta;
  });
}

int swnav_range(const swnav_scenario* sc, const char* field_path,
                uint64_t seed, size_t snapshot, double* out_range_m,
                const char* out_dir, char* errbuf, size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    const auto prep = prepare_ranging(sc->cfg, field_path, seed);
    const std::size_t n =
        resolve_snapshot(prep, snapshot, prep.series.snapshot_count() - 1);

    double beta;
    if (sc->cfg.beta) {
      beta = *sc->cfg.beta;
    } else {
      // Mirrors the navigation run: self-calibrate once at the first
      // feasible snapshot against the known initial geometry.
      require(prep.series.has_truth(),
              "field has no truth track to calibrate the invariant against;"
              " set beta in the scenario");
      const std::size_t n0 = prep.first_feasible;
      const auto z0 = swnav::rangerate::realtime_rate_series(prep.track, n0);
      beta = swnav::wiranging::calibrate_beta(
                 slice_rows(prep.rows, n0 + 1), z0,
                 prep.series.snapshot_interval_s, prep.wi,
                 prep.series.truth[n0].range_m)
                 .beta;
    }

    const auto z = swnav::rangerate::realtime_rate_series(prep.track, n);
    const auto est = swnav::wiranging::estimate_range(
        slice_rows(prep.rows, n + 1), z, prep.series.snapshot_interval_s,
        prep.wi, beta);
    write_objective_under(out_dir, "range_scan.csv", est.curve, "range_m");
    if (out_range_m) *out_range_m = est.range_m;
  });
}

int swnav_navigate(const swnav_scenario* sc, uint64_t seed,
                   const char* range_source, size_t range_fix_interval,
                   const char* out_dir, char* errbuf, size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    require(out_dir != nullptr, "out_dir must not be NULL");
    const auto opts = parse_run_options(range_source, range_fix_interval);
    const auto result = swnav::harness::run_scenario(sc->cfg, seed, opts);
    swnav::harness::write_run_outputs(out_dir, sc->cfg, result);
  });
}

int swnav_monte_carlo(const swnav_scenario* sc, size_t trials, size_t workers,
                      const char* range_source, size_t range_fix_interval,
                      const char* out_dir, char* errbuf, size_t errlen) {
  return guarded(errbuf, errlen, [&] {
    require(sc != nullptr, "scenario must not be NULL");
    require(out_dir != nullptr, "out_dir must not be NULL");
    const auto opts = parse_run_options(range_source, range_fix_interval);
    if (trials == 0) trials = sc->cfg.trials;
    const auto result =
        swnav::harness::monte_carlo(sc->cfg, trials, opts, workers);
    swnav::harness::write_monte_carlo_outputs(out_dir, sc->cfg, result);
  });
}

}  // extern "C"
