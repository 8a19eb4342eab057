#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "core/rng.hpp"

namespace swnav::navfilter {

// World frame: x east, y north, heading in degrees in [0, 360),
// 0 deg = east, counterclockwise positive.
struct AuvState {
  std::array<double, 2> position_m{0.0, 0.0};
  std::array<double, 2> velocity_mps{0.0, 0.0};
  double heading_deg = 0.0;
};

double wrap_heading_deg(double deg);     // to [0, 360)
double wrap_error_deg(double deg);       // to (-180, 180]

// Nearly constant velocity model; the driving noise is a random linear
// acceleration (shared std for both axes) plus a random turn rate,
// injected through position/velocity/heading consistently over one step.
struct MotionModel {
  double t_delta_s = 1.0;
  double accel_std_mps2 = 0.02;
  double turn_rate_std_dps = 0.5;

  void validate() const;
};

struct NoiseModel {
  double range_std_m = 150.0;
  double velocity_std_mps = 0.02;
  double compass_std_deg = 0.5;

  void validate() const;
};

// range_m is absent until acoustic ranging produces its first fix.
// body_velocity_mps is expressed in the vehicle frame (x forward along the
// heading, y to port).
struct MeasurementBundle {
  std::optional<double> range_m;
  std::array<double, 2> body_velocity_mps{0.0, 0.0};
  double compass_deg = 0.0;
  std::array<double, 2> soo_position_m{0.0, 0.0};
};

// Straight-line ship track from the last AIS contact.
struct SooTrack {
  std::array<double, 2> position_m{0.0, 0.0};
  std::array<double, 2> velocity_mps{0.0, 0.0};

  std::array<double, 2> position_at(double t_s) const {
    return {position_m[0] + t_s * velocity_mps[0],
            position_m[1] + t_s * velocity_mps[1]};
  }
};

struct PriorSpread {
  double position_std_m = 500.0;
  double velocity_std_mps = 0.1;
  double heading_std_deg = 2.0;

  void validate() const;
};

// Bootstrap particle filter over AuvState. Weights live in the log domain
// between normalizations so a 150 m range likelihood across a 500 m prior
// spread cannot underflow. All draws come from counter-based per-particle
// streams, so results are independent of evaluation order.
class ParticleFilter {
 public:
  ParticleFilter(std::size_t count, const AuvState& prior_mean,
                 const PriorSpread& spread, std::uint64_t seed);
  // Explicit states, uniform weights; used to stage exact configurations.
  ParticleFilter(std::vector<AuvState> states, std::uint64_t seed);

  void predict(const MotionModel& motion);
  void update(const MeasurementBundle& z, const NoiseModel& noise);

  // Systematic resampling when ESS < ess_threshold * count, then a
  // zero-mean Gaussian of std roughen_std_m added to position only.
  // Returns whether resampling ran.
  bool resample_and_roughen(double ess_threshold = 0.5,
                            double roughen_std_m = 10.0);

  AuvState mmse_estimate() const;
  // Weighted covariance of position: {xx, xy, yy}.
  std::array<double, 3> position_covariance() const;
  double effective_sample_size() const;

  std::size_t size() const { return px_.size(); }
  AuvState particle(std::size_t i) const;
  const std::vector<double>& weights() const { return w_; }

 private:
  void normalize_from_log();

  std::vector<double> px_, py_, vx_, vy_, heading_;
  std::vector<double> w_, logw_;
  Rng base_;
  std::uint64_t epoch_ = 0;
};

struct TrajectoryRow {
  double time_s = 0.0;
  AuvState estimate;
  std::array<double, 3> position_cov;  // xx, xy, yy
  std::array<double, 2> truth_position_m{0.0, 0.0};
  bool has_range_fix = false;
};

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRow>& rows);

}  // namespace swnav::navfilter
