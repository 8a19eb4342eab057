#include "navfilter/navfilter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace swnav::navfilter {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Epoch tags keep every stochastic pass on its own stream family so a
// particle's draws never repeat across steps.
enum : std::uint64_t { kPriorEpochTag = 0x70, kPredictTag = 0x71,
                       kResampleTag = 0x72, kRoughenTag = 0x73 };

}  // namespace

double wrap_heading_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

double wrap_error_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w > 180.0) w -= 360.0;
  if (w <= -180.0) w += 360.0;
  return w;
}

void MotionModel::validate() const {
  if (!(t_delta_s > 0.0))
    throw Error(ErrorKind::config, "t_delta_s must be positive");
  if (!(accel_std_mps2 >= 0.0) || !(turn_rate_std_dps >= 0.0))
    throw Error(ErrorKind::config, "motion noise stds must be nonnegative");
}

void NoiseModel::validate() const {
  if (!(range_std_m > 0.0) || !(velocity_std_mps > 0.0) ||
      !(compass_std_deg > 0.0))
    throw Error(ErrorKind::config, "measurement stds must be positive");
}

void PriorSpread::validate() const {
  if (!(position_std_m >= 0.0) || !(velocity_std_mps >= 0.0) ||
      !(heading_std_deg >= 0.0))
    throw Error(ErrorKind::config, "prior spreads must be nonnegative");
}

ParticleFilter::ParticleFilter(std::size_t count, const AuvState& prior_mean,
                               const PriorSpread& spread, std::uint64_t seed)
    : base_(seed) {
  if (count == 0)
    throw Error(ErrorKind::config, "particle count must be at least 1");
  spread.validate();
  px_.resize(count);
  py_.resize(count);
  vx_.resize(count);
  vy_.resize(count);
  heading_.resize(count);
  w_.assign(count, 1.0 / static_cast<double>(count));
  logw_.assign(count, -std::log(static_cast<double>(count)));

  const Rng pass = base_.stream(kPriorEpochTag).stream(epoch_++);
  for (std::size_t i = 0; i < count; ++i) {
    Rng r = pass.stream(i);
    px_[i] = r.normal(prior_mean.position_m[0], spread.position_std_m);
    py_[i] = r.normal(prior_mean.position_m[1], spread.position_std_m);
    vx_[i] = r.normal(prior_mean.velocity_mps[0], spread.velocity_std_mps);
    vy_[i] = r.normal(prior_mean.velocity_mps[1], spread.velocity_std_mps);
    heading_[i] =
        wrap_heading_deg(r.normal(prior_mean.heading_deg, spread.heading_std_deg));
  }
}

ParticleFilter::ParticleFilter(std::vector<AuvState> states, std::uint64_t seed)
    : base_(seed) {
  if (states.empty())
    throw Error(ErrorKind::config, "particle count must be at least 1");
  const std::size_t count = states.size();
  px_.resize(count);
  py_.resize(count);
  vx_.resize(count);
  vy_.resize(count);
  heading_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    px_[i] = states[i].position_m[0];
    py_[i] = states[i].position_m[1];
    vx_[i] = states[i].velocity_mps[0];
    vy_[i] = states[i].velocity_mps[1];
    heading_[i] = wrap_heading_deg(states[i].heading_deg);
  }
  w_.assign(count, 1.0 / static_cast<double>(count));
  logw_.assign(count, -std::log(static_cast<double>(count)));
}

void ParticleFilter::predict(const MotionModel& motion) {
  motion.validate();
  const double t = motion.t_delta_s;
  const Rng pass = base_.stream(kPredictTag).stream(epoch_++);
  for (std::size_t i = 0; i < px_.size(); ++i) {
    Rng r = pass.stream(i);
    const double ax = r.normal(0.0, motion.accel_std_mps2);
    const double ay = r.normal(0.0, motion.accel_std_mps2);
    const double turn = r.normal(0.0, motion.turn_rate_std_dps);
    px_[i] += t * vx_[i] + 0.5 * t * t * ax;
    py_[i] += t * vy_[i] + 0.5 * t * t * ay;
    vx_[i] += t * ax;
    vy_[i] += t * ay;
    heading_[i] = wrap_heading_deg(heading_[i] + t * turn);
  }
}

void ParticleFilter::update(const MeasurementBundle& z,
                            const NoiseModel& noise) {
  noise.validate();
  const double inv2_range = 0.5 / (noise.range_std_m * noise.range_std_m);
  const double inv2_vel =
      0.5 / (noise.velocity_std_mps * noise.velocity_std_mps);
  const double inv2_comp =
      0.5 / (noise.compass_std_deg * noise.compass_std_deg);

  for (std::size_t i = 0; i < px_.size(); ++i) {
    double lw = logw_[i];
    if (z.range_m) {
      const double d = std::hypot(px_[i] - z.soo_position_m[0],
                                  py_[i] - z.soo_position_m[1]);
      const double e = *z.range_m - d;
      lw -= e * e * inv2_range;
    }
    const double th = heading_[i] * kDegToRad;
    const double c = std::cos(th), s = std::sin(th);
    const double ex = z.body_velocity_mps[0] - (c * vx_[i] + s * vy_[i]);
    const double ey = z.body_velocity_mps[1] - (-s * vx_[i] + c * vy_[i]);
    lw -= (ex * ex + ey * ey) * inv2_vel;
    const double ec = wrap_error_deg(z.compass_deg - heading_[i]);
    lw -= ec * ec * inv2_comp;
    logw_[i] = lw;
  }
  normalize_from_log();
}

void ParticleFilter::normalize_from_log() {
  const double m = *std::max_element(logw_.begin(), logw_.end());
  if (!std::isfinite(m))
    throw Error(ErrorKind::weight_collapse,
                "all particle likelihoods vanished");
  double sum = 0.0;
  for (std::size_t i = 0; i < logw_.size(); ++i) {
    w_[i] = std::exp(logw_[i] - m);
    sum += w_[i];
  }
  const double log_sum = m + std::log(sum);
  for (std::size_t i = 0; i < logw_.size(); ++i) {
    w_[i] /= sum;
    logw_[i] -= log_sum;
  }
}

double ParticleFilter::effective_sample_size() const {
  double s2 = 0.0;
  for (double w : w_) s2 += w * w;
  return 1.0 / s2;
}

bool ParticleFilter::resample_and_roughen(double ess_threshold,
                                          double roughen_std_m) {
  if (!(ess_threshold > 0.0) || !(ess_threshold <= 1.0))
    throw Error(ErrorKind::config, "ess_threshold must be in (0, 1]");
  if (!(roughen_std_m >= 0.0))
    throw Error(ErrorKind::config, "roughen_std_m must be nonnegative");
  const std::size_t n = px_.size();
  if (effective_sample_size() >= ess_threshold * static_cast<double>(n))
    return false;

  Rng pick = base_.stream(kResampleTag).stream(epoch_++);
  const double u0 = pick.uniform();
  std::vector<std::size_t> parent(n);
  double cum = w_[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + u0) / static_cast<double>(n);
    while (u > cum && j + 1 < n) cum += w_[++j];
    parent[i] = j;
  }

  auto gather = [&](std::vector<double>& v) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = v[parent[i]];
    v.swap(out);
  };
  gather(px_);
  gather(py_);
  gather(vx_);
  gather(vy_);
  gather(heading_);

  w_.assign(n, 1.0 / static_cast<double>(n));
  logw_.assign(n, -std::log(static_cast<double>(n)));

  const Rng pass = base_.stream(kRoughenTag).stream(epoch_++);
  for (std::size_t i = 0; i < n; ++i) {
    Rng r = pass.stream(i);
    px_[i] += r.normal(0.0, roughen_std_m);
    py_[i] += r.normal(0.0, roughen_std_m);
  }
  return true;
}

AuvState ParticleFilter::mmse_estimate() const {
  AuvState out;
  double cx = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < px_.size(); ++i) {
    const double w = w_[i];
    out.position_m[0] += w * px_[i];
    out.position_m[1] += w * py_[i];
    out.velocity_mps[0] += w * vx_[i];
    out.velocity_mps[1] += w * vy_[i];
    const double th = heading_[i] * kDegToRad;
    cx += w * std::cos(th);
    sx += w * std::sin(th);
  }
  out.heading_deg = wrap_heading_deg(std::atan2(sx, cx) / kDegToRad);
  return out;
}

std::array<double, 3> ParticleFilter::position_covariance() const {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < px_.size(); ++i) {
    mx += w_[i] * px_[i];
    my += w_[i] * py_[i];
  }
  std::array<double, 3> cov{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < px_.size(); ++i) {
    const double dx = px_[i] - mx, dy = py_[i] - my;
    cov[0] += w_[i] * dx * dx;
    cov[1] += w_[i] * dx * dy;
    cov[2] += w_[i] * dy * dy;
  }
  return cov;
}

AuvState ParticleFilter::particle(std::size_t i) const {
  return {{px_[i], py_[i]}, {vx_[i], vy_[i]}, heading_[i]};
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRow>& rows) {
  CsvWriter csv(path);
  csv.header({"time_s", "est_x", "est_y", "est_vx", "est_vy", "est_heading",
              "cov_xx", "cov_xy", "cov_yy", "truth_x", "truth_y",
              "has_range_fix"});
  for (const auto& r : rows)
    csv.row({r.time_s, r.estimate.position_m[0], r.estimate.position_m[1],
             r.estimate.velocity_mps[0], r.estimate.velocity_mps[1],
             r.estimate.heading_deg, r.position_cov[0], r.position_cov[1],
             r.position_cov[2], r.truth_position_m[0], r.truth_position_m[1],
             r.has_range_fix ? 1.0 : 0.0});
}

}  // namespace swnav::navfilter
