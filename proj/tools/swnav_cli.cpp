// Command-line front end; depends only on the public C API.
#include <swnav/swnav.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr std::size_t kErrLen = 1024;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool json_errors = false;
};

void report(const Common& common, int status, const char* errbuf) {
  if (common.json_errors) {
    // Message text is escaped minimally; keys never contain quotes.
    std::string escaped;
    for (const char* p = errbuf; *p; ++p) {
      if (*p == '"' || *p == '\\') escaped += '\\';
      if (*p == '\n') {
        escaped += "\\n";
        continue;
      }
      escaped += *p;
    }
    std::fprintf(stderr, "{\"status\": %d, \"message\": \"%s\"}\n", status,
                 escaped.c_str());
  } else {
    std::fprintf(stderr, "error: %s\n", errbuf);
  }
}

using ScenarioPtr = std::unique_ptr<swnav_scenario,
                                    decltype(&swnav_scenario_free)>;

// Loads (or defaults) the scenario and applies overrides; nonzero status
// means the error was already reported.
int make_scenario(const Common& common, ScenarioPtr& out) {
  char errbuf[kErrLen] = {0};
  swnav_scenario* sc = nullptr;
  int status = common.config_path.empty()
                   ? swnav_scenario_default(&sc, errbuf, kErrLen)
                   : swnav_scenario_load(common.config_path.c_str(), &sc,
                                         errbuf, kErrLen);
  if (status != 0) {
    report(common, status, errbuf);
    return status;
  }
  out = ScenarioPtr(sc, &swnav_scenario_free);
  for (const auto& assignment : common.overrides) {
    status = swnav_scenario_override(out.get(), assignment.c_str(), errbuf,
                                     kErrLen);
    if (status != 0) {
      report(common, status, errbuf);
      return status;
    }
  }
  return 0;
}

std::uint64_t effective_seed(const Common& common, const swnav_scenario* sc) {
  return common.seed_given ? common.seed : swnav_scenario_seed(sc);
}

void add_common_flags(CLI::App* cmd, Common& common, bool with_output_dir) {
  cmd->add_option("-c,--config", common.config_path,
                  "Scenario file; omitted means built-in defaults");
  cmd->add_option("--set", common.overrides,
                  "Override one scenario value, dotted.key=value");
  cmd->add_option("--seed", common.seed, "Random seed; default from scenario")
      ->each([&common](const std::string&) { common.seed_given = true; });
  cmd->add_flag("--json-errors", common.json_errors,
                "Machine-readable errors on stderr");
  if (with_output_dir)
    cmd->add_option("-o,--output-dir", common.output_dir,
                    "Directory for result files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-hydrophone passive ranging and navigation pipelines"};
  app.require_subcommand(1);
  app.set_version_flag("--version", swnav_version());

  Common common;
  char errbuf[kErrLen] = {0};
  int status = 0;

  auto* c_export = app.add_subcommand(
      "export-defaults", "Write the built-in scenario configuration");
  std::string export_path = "scenario.json";
  add_common_flags(c_export, common, false);
  c_export->add_option("-o,--output", export_path, "Destination file");
  c_export->callback([&] {
    ScenarioPtr sc(nullptr, &swnav_scenario_free);
    status = make_scenario(common, sc);
    if (status != 0) return;
    status = swnav_scenario_save(sc.get(), export_path.c_str(), errbuf,
                                 kErrLen);
    if (status != 0) report(common, status, errbuf);
  });

  auto* c_field = app.add_subcommand(
      "simulate-field", "Synthesize the tonal pressure field, with truth");
  std::string field_out = "field.wgf1";
  add_common_flags(c_field, common, false);
  c_field->add_option("-o,--output", field_out, "Destination field file");
  c_field->callback([&] {
    ScenarioPtr sc(nullptr, &swnav_scenario_free);
    status = make_scenario(common, sc);
    if (status != 0) return;
    status = swnav_simulate_field(sc.get(), effective_seed(common, sc.get()),
                                  field_out.c_str(), errbuf, kErrLen);
    if (status != 0) report(common, status, errbuf);
  });

  auto* c_spec = app.add_subcommand(
      "spectrogram", "Tone intensity series from a field or WAV recording");
  std::string spec_field, spec_wav, spec_out = "spectrogram.csv";
  add_common_flags(c_spec, common, false);
  c_spec->add_option("--field", spec_field,
                     "Field file; omitted means synthesize");
  c_spec->add_option("--wav", spec_wav, "Mono WAV recording")
      ->excludes("--field");
  c_spec->add_option("-o,--output", spec_out, "Destination CSV");
  c_spec->callback([&] {
    ScenarioPtr sc(nullptr, &swnav_scenario_free);
    status = make_scenario(common, sc);
    if (status != 0) return;
    status =
        spec_wav.empty()
            ? swnav_spectrogram(sc.get(),
                                spec_field.empty() ? nullptr
                                                   : spec_field.c_str(),
                                effective_seed(common, sc.get()),
                                spec_out.c_str(), errbuf, kErrLen)
            : swnav_wav_spectrogram(sc.get(), spec_wav.c_str(),
                                    spec_out.c_str(), errbuf, kErrLen);
    if (status != 0) report(common, status, errbuf);
  });

  auto* c_rate = app.add_subcommand(
      "range-rate", "Difference-method range-rate track");
  std::string rate_field;
  add_common_flags(c_rate, common, true);
  c_rate->add_option("--field", rate_field,
                     "Field file; omitted means synthesize");
  c_rate->callback([&] {
    ScenarioPtr sc(nullptr, &swnav_scenario_free);
    status = make_scenario(common, sc);
    if (status != 0) return;
    status = swnav_range_rate(sc.get(),
                              rate_field.empty() ? nullptr
                                                 : rate_field.c_str(),
                              effective_seed(common, sc.get()),
                              common.output_dir.c_str(), errbuf, kErrLen);
    if (status != 0) report(common, status, errbuf);
  });

  auto* c_cal = app.add_subcommand(
      "calibrate-beta",
      "Measure the waveguide invariant at a known-range snapshot");
  std::string cal_field, cal_dir;
  std::size_t cal_snapshot = 0;
  double cal_known = 0.0;
  add_common_flags(c_cal, common, false);
  c_cal->add_option("--field", cal_field,
                    "Field file; omitted means synthesize");
  c_cal->add_option("--snapshot", cal_snapshot,
                    "Calibration snapshot; 0 means first feasible");
  c_cal->add_option("--known-range", cal_known,
                    "Reference range in m; 0 takes the field's truth");
  c_cal->add_option("-o,--output-dir", cal_dir,
                    "Directory for the objective curve, optional");
  c_cal->callback([&] {
    ScenarioPtr sc(nullptr, &swnav_scenario_free);
    status = make_scenario(common, sc);
    if (status != 0) return;
    double beta = 0.0;
    status = swnav_calibrate_beta(
        sc.get(), cal_field.empty() ? nullptr : cal_field.c_str(),
        effective_seed(common, sc.get()), cal_snapshot, cal_known,
        cal_dir.empty() ? nullptr : cal_dir.c_str(), &beta, errbuf, kErrLen);
    if (status != 0) {
      report(common, status, errbuf);
      return;
    }
    std::printf("beta %.6f\n", beta);
  });

  auto* c_range = app.add_subcommand(
      "range", "Waveguide-invariant range estimate at one snapshot");
  std::string range_field, range_dir;
  std::size_t range_snapshot = 0;
  add_common_flags(c_range, common, false);
  c_range->add_option("--field", range_field,
                      "Field file; omitted means synthesize");
  c_range->add_option("--snapshot", range_snapshot,
                      "Estimation snapshot; 0 means last");
  c_range->add_option("-o,--output-dir", range_dir,
                      "Directory for the objective curve, optional");
  c_range->callback([&] {
    ScenarioPtr sc(nullptr, &swnav_scenario_free);
    status = make_scenario(common, sc);
    if (status != 0) return;
    double range_m = 0.0;
    status = swnav_range(sc.get(),
                         range_field.empty() ? nullptr : range_field.c_str(),
                         effective_seed(common, sc.get()), range_snapshot,
                         &range_m,
                         range_dir.empty() ? nullptr : range_dir.c_str(),
                         errbuf, kErrLen);
    if (status != 0) {
      report(common, status, errbuf);
      return;
    }
    std::printf("range_m %.3f\n", range_m);
  });

  auto* c_nav = app.add_subcommand(
      "navigate", "One fused dead-reckoning plus acoustic-ranging run");
  std::string nav_source = "acoustic";
  std::size_t nav_interval = 5;
  add_common_flags(c_nav, common, true);
  c_nav->add_option("--range-source", nav_source,
                    "acoustic, truth, or none")
      ->check(CLI::IsMember({"acoustic", "truth", "none"}));
  c_nav->add_option("--fix-interval", nav_interval,
                    "Snapshots between range fixes");
  c_nav->callback([&] {
    ScenarioPtr sc(nullptr, &swnav_scenario_free);
    status = make_scenario(common, sc);
    if (status != 0) return;
    status = swnav_navigate(sc.get(), effective_seed(common, sc.get()),
                            nav_source.c_str(), nav_interval,
                            common.output_dir.c_str(), errbuf, kErrLen);
    if (status != 0) report(common, status, errbuf);
  });

  auto* c_mc = app.add_subcommand(
      "monte-carlo", "Repeated runs with per-trial seeds, aggregated");
  std::string mc_source = "acoustic";
  std::size_t mc_interval = 5;
  std::size_t mc_trials = 0;
  std::size_t mc_workers = 0;
  add_common_flags(c_mc, common, true);
  c_mc->add_option("--range-source", mc_source, "acoustic, truth, or none")
      ->check(CLI::IsMember({"acoustic", "truth", "none"}));
  c_mc->add_option("--fix-interval", mc_interval,
                   "Snapshots between range fixes");
  c_mc->add_option("--trials", mc_trials,
                   "Trial count; 0 means the scenario's");
  c_mc->add_option("--workers", mc_workers,
                   "Worker threads; 0 reads SWNAV_WORKERS");
  c_mc->callback([&] {
    ScenarioPtr sc(nullptr, &swnav_scenario_free);
    status = make_scenario(common, sc);
    if (status != 0) return;
    if (common.seed_given) {
      const std::string assignment = "seed=" + std::to_string(common.seed);
      status = swnav_scenario_override(sc.get(), assignment.c_str(), errbuf,
                                       kErrLen);
      if (status != 0) {
        report(common, status, errbuf);
        return;
      }
    }
    status = swnav_monte_carlo(sc.get(), mc_trials, mc_workers,
                               mc_source.c_str(), mc_interval,
                               common.output_dir.c_str(), errbuf, kErrLen);
    if (status != 0) report(common, status, errbuf);
  });

  // --trials, --snr-db, --particles ride on every subcommand that runs a
  // scenario, as sugar over --set.
  for (auto* cmd : {c_field, c_spec, c_rate, c_cal, c_range, c_nav, c_mc}) {
    auto sugar = [&common](const char* key) {
      return [&common, key](const std::string& v) {
        common.overrides.push_back(std::string(key) + "=" + v);
      };
    };
    cmd->add_option_function<std::string>("--snr-db", sugar("snr_db"),
                                          "Override the scenario SNR");
    cmd->add_option_function<std::string>("--particles", sugar("particles"),
                                          "Override the particle count");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0 && common.json_errors) {
      report(common, 2, e.what());
      return 2;
    }
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return status;
}
