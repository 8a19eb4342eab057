#include "waveguide/waveguide.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/error.hpp"

namespace swnav::waveguide {

using std::numbers::pi;

namespace {

constexpr double kMinRange_m = 100.0;  // far-field validity guard

double omega(double f_hz) { return 2.0 * pi * f_hz; }

}  // namespace

void Environment::validate() const {
  if (!(water_depth_m > 0.0))
    throw Error(ErrorKind::config, "water_depth_m must be positive");
  if (sound_speed_mps < 1400.0 || sound_speed_mps > 1700.0)
    throw Error(ErrorKind::config, "sound_speed_mps outside [1400, 1700]");
  if (bottom == BottomType::pekeris_halfspace) {
    if (halfspace.sound_speed_mps < 1400.0 ||
        halfspace.sound_speed_mps > 1700.0)
      throw Error(ErrorKind::config,
                  "halfspace sound speed outside [1400, 1700]");
    if (!(halfspace.sound_speed_mps > sound_speed_mps))
      throw Error(ErrorKind::config,
                  "pekeris halfspace speed must exceed water speed");
    if (!(halfspace.density_ratio > 0.0))
      throw Error(ErrorKind::config, "density_ratio must be positive");
  }
}

double ModeSet::mode_function_at(std::size_t m, double z_m) const {
  const auto& psi = mode_functions[m];
  const double pos = z_m / depth_step_m;
  if (pos <= 0.0) return psi.front();
  const auto last = static_cast<double>(psi.size() - 1);
  if (pos >= last) return psi.back();
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return psi[i] * (1.0 - frac) + psi[i + 1] * frac;
}

double pekeris_characteristic(const Environment& env, double f_hz,
                              double gamma) {
  // gamma = vertical wavenumber in water; b = modal decay in the bottom.
  // Roots of rho_ratio * gamma * cos(gamma D) + b * sin(gamma D) on
  // gamma in (0, gamma_max) are the trapped modes.
  const double d = env.water_depth_m;
  const double kw = omega(f_hz) / env.sound_speed_mps;
  const double kb = omega(f_hz) / env.halfspace.sound_speed_mps;
  const double gamma_max_sq = kw * kw - kb * kb;
  const double b_sq = gamma_max_sq - gamma * gamma;
  const double b = std::sqrt(std::max(b_sq, 0.0));
  return env.halfspace.density_ratio * gamma * std::cos(gamma * d) +
         b * std::sin(gamma * d);
}

namespace {

std::vector<double> tabulate_mode(double gamma, double amplitude,
                                  double depth_m, double step_m) {
  const auto n = static_cast<std::size_t>(std::floor(depth_m / step_m)) + 1;
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < n; ++i)
    psi[i] = amplitude * std::sin(gamma * static_cast<double>(i) * step_m);
  return psi;
}

ModeSet solve_rigid(const Environment& env, double f_hz) {
  const double d = env.water_depth_m;
  const double c = env.sound_speed_mps;
  const double kw = omega(f_hz) / c;

  ModeSet out;
  out.frequency_hz = f_hz;
  for (std::size_t m = 1;; ++m) {
    const double gamma = (static_cast<double>(m) - 0.5) * pi / d;
    if (gamma >= kw) break;
    const double k = std::sqrt(kw * kw - gamma * gamma);
    out.wavenumbers.push_back(k);
    // Orthonormal over the water column: integral of sin^2 is D/2.
    out.mode_functions.push_back(
        tabulate_mode(gamma, std::sqrt(2.0 / d), d, out.depth_step_m));
  }
  if (out.wavenumbers.empty())
    throw Error(ErrorKind::no_trapped_modes,
                "no trapped modes at " + std::to_string(f_hz) + " Hz");
  return out;
}

ModeSet solve_pekeris(const Environment& env, double f_hz) {
  const double d = env.water_depth_m;
  const double kw = omega(f_hz) / env.sound_speed_mps;
  const double kb = omega(f_hz) / env.halfspace.sound_speed_mps;
  const double rho = env.halfspace.density_ratio;
  const double gamma_max = std::sqrt(kw * kw - kb * kb);

  // Bracket sign changes on a grid fine enough to separate consecutive
  // roots (spacing ~pi/D), then bisect. gamma = 0 is a trivial zero of the
  // characteristic function, not a mode, so the scan starts just above it.
  const double expected = gamma_max * d / pi + 1.0;
  const std::size_t grid_n =
      std::max<std::size_t>(64, static_cast<std::size_t>(expected * 40.0));
  const double lo_guard = gamma_max * 1e-9;

  std::vector<double> gammas;
  double g_prev = lo_guard;
  double f_prev = pekeris_characteristic(env, f_hz, g_prev);
  for (std::size_t i = 1; i <= grid_n; ++i) {
    const double g =
        lo_guard + (gamma_max - lo_guard) * static_cast<double>(i) /
                       static_cast<double>(grid_n);
    const double fv = pekeris_characteristic(env, f_hz, g);
    if ((f_prev < 0.0) != (fv < 0.0)) {
      double a = g_prev, b = g, fa = f_prev;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = pekeris_characteristic(env, f_hz, mid);
        if ((fa < 0.0) != (fm < 0.0)) {
          b = mid;
        } else {
          a = mid;
          fa = fm;
        }
        if (b - a <= 1e-15 * gamma_max) break;
      }
      gammas.push_back(0.5 * (a + b));
    }
    g_prev = g;
    f_prev = fv;
  }

  if (gammas.empty())
    throw Error(ErrorKind::no_trapped_modes,
                "no trapped modes at " + std::to_string(f_hz) + " Hz");

  ModeSet out;
  out.frequency_hz = f_hz;
  for (double gamma : gammas) {
    const double k_sq = kw * kw - gamma * gamma;
    if (k_sq <= kb * kb) continue;
    const double k = std::sqrt(k_sq);
    const double b = std::sqrt(std::max(k_sq - kb * kb, 0.0));
    if (!(b > 0.0))
      throw Error(ErrorKind::non_convergence,
                  "mode at halfspace cutoff did not converge");
    // Density-weighted normalization including the evanescent tail.
    const double sin_gd = std::sin(gamma * d);
    const double water_part = d / 2.0 - std::sin(2.0 * gamma * d) / (4.0 * gamma);
    const double tail_part = sin_gd * sin_gd / (2.0 * b * rho);
    const double amplitude = 1.0 / std::sqrt(water_part + tail_part);
    out.wavenumbers.push_back(k);
    out.mode_functions.push_back(
        tabulate_mode(gamma, amplitude, d, out.depth_step_m));
  }
  // gammas ascend, so wavenumbers descend already.
  return out;
}

}  // namespace

ModeSet solve_modes(const Environment& env, double f_hz) {
  env.validate();
  if (!(f_hz > 0.0)) throw Error(ErrorKind::config, "frequency must be positive");
  return env.bottom == BottomType::perfectly_rigid ? solve_rigid(env, f_hz)
                                                   : solve_pekeris(env, f_hz);
}

std::complex<double> pressure(const ModeSet& modes, double z_src_m,
                              double z_rcv_m, double range_m) {
  if (range_m < kMinRange_m)
    throw Error(ErrorKind::range_too_small,
                "range below far-field guard of 100 m");
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t m = 0; m < modes.mode_count(); ++m) {
    const double k = modes.wavenumbers[m];
    const double amp = modes.mode_function_at(m, z_src_m) *
                       modes.mode_function_at(m, z_rcv_m) /
                       std::sqrt(k * range_m);
    acc += amp * std::polar(1.0, k * range_m);
  }
  return acc;
}

PressureFieldSeries synthesize_series(const Environment& env,
                                      const GeometrySeries& geometry,
                                      const std::vector<double>& tones_hz,
                                      double snr_db, std::uint64_t seed) {
  if (geometry.truth.empty())
    throw Error(ErrorKind::config, "geometry has no snapshots");
  if (tones_hz.empty()) throw Error(ErrorKind::config, "no tones configured");

  std::vector<ModeSet> modes;
  modes.reserve(tones_hz.size());
  for (double f : tones_hz) modes.push_back(solve_modes(env, f));

  const std::size_t n_snap = geometry.truth.size();
  PressureFieldSeries out;
  out.tones_hz = tones_hz;
  out.snapshot_interval_s = geometry.snapshot_interval_s;
  out.truth = geometry.truth;
  out.carrier_phase = false;
  out.samples.assign(n_snap,
                     std::vector<std::complex<double>>(tones_hz.size()));

  double signal_power_sum = 0.0;
  for (std::size_t n = 0; n < n_snap; ++n) {
    for (std::size_t t = 0; t < tones_hz.size(); ++t) {
      const std::complex<double> p =
          pressure(modes[t], geometry.source_depth_m, geometry.receiver_depth_m,
                   geometry.truth[n].range_m);
      out.samples[n][t] = p;
      signal_power_sum += std::norm(p);
    }
  }

  if (std::isfinite(snr_db)) {
    const double mean_power =
        signal_power_sum / static_cast<double>(n_snap * tones_hz.size());
    const double noise_power = mean_power / std::pow(10.0, snr_db / 10.0);
    const double sigma = std::sqrt(noise_power / 2.0);  // per component
    Rng rng = Rng(seed).stream(0x6e6f697365ull);  // noise stream
    for (std::size_t n = 0; n < n_snap; ++n) {
      Rng row = rng.stream(n);
      for (std::size_t t = 0; t < tones_hz.size(); ++t) {
        Rng cell = row.stream(t);
        out.samples[n][t] +=
            std::complex<double>(cell.normal(0.0, sigma), cell.normal(0.0, sigma));
      }
    }
  }
  return out;
}

}  // namespace swnav::waveguide
