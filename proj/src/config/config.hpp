#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "navfilter/navfilter.hpp"
#include "rangerate/rangerate.hpp"
#include "sigproc/sigproc.hpp"
#include "waveguide/waveguide.hpp"
#include "wiranging/wiranging.hpp"

namespace swnav::config {

// One scenario file drives every pipeline stage. The navigation filter's
// step length always equals snapshot_interval_s; motion noise is stored
// here and stamped into a MotionModel on demand.
struct ScenarioConfig {
  waveguide::Environment environment;
  double source_depth_m = 9.0;
  double receiver_depth_m = 150.0;

  navfilter::AuvState auv_initial{{0.0, 0.0}, {1.1, 1.1}, 45.0};
  navfilter::SooTrack soo{{2000.0, 0.0}, {0.0, 5.14}};

  double duration_s = 1200.0;
  double snapshot_interval_s = 1.0;
  std::vector<double> tones_hz{109.0, 127.0, 145.0, 163.0};
  double snr_db = 12.0;

  sigproc::DftConfig dft;
  rangerate::RangeRateConfig rangerate;
  // wiranging.tones_hz empty means "use the scenario tone set".
  wiranging::WiConfig wiranging;
  // Waveguide invariant for the bundled environment, measured once at a
  // known range the way a surfaced vehicle with GPS would. Unset means
  // "calibrate at the first fix against the known initial geometry".
  std::optional<double> beta = 1.05;

  double accel_std_mps2 = 0.02;
  double turn_rate_std_dps = 0.5;
  navfilter::NoiseModel noise;
  navfilter::PriorSpread prior;
  // Position jitter applied at every resampling stage.
  double roughening_std_m = 10.0;

  std::size_t particle_count = 20000;
  std::size_t trials = 20;
  std::uint64_t seed = 1;

  navfilter::MotionModel motion_model() const {
    return {snapshot_interval_s, accel_std_mps2, turn_rate_std_dps};
  }
  wiranging::WiConfig wiranging_resolved() const {
    auto wi = wiranging;
    if (wi.tones_hz.empty()) wi.tones_hz = tones_hz;
    return wi;
  }
  std::size_t snapshot_count() const;

  void validate() const;
};

ScenarioConfig default_scenario();

// Strict translation: unknown keys and type mismatches throw
// Error(config) naming the dotted path.
std::string scenario_to_json_text(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json_text(const std::string& text);

ScenarioConfig load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path,
                   const ScenarioConfig& cfg);

// Applies "dotted.key=value" onto the JSON form of cfg, type-checked
// against the existing leaf, and re-parses strictly.
ScenarioConfig apply_overrides(const ScenarioConfig& cfg,
                               const std::vector<std::string>& overrides);

}  // namespace swnav::config
