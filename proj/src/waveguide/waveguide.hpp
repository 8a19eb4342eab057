#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/rng.hpp"

namespace swnav::waveguide {

enum class BottomType { perfectly_rigid, pekeris_halfspace };

struct Halfspace {
  double sound_speed_mps = 1600.0;
  double density_ratio = 1.8;  // bottom density / water density
};

struct Environment {
  double water_depth_m = 200.0;
  double sound_speed_mps = 1500.0;
  BottomType bottom = BottomType::pekeris_halfspace;
  Halfspace halfspace;

  // Throws Error(config) when an invariant is violated.
  void validate() const;
};

// Trapped modes of a range-independent isovelocity waveguide at one
// frequency. Mode functions are tabulated on a uniform depth grid and
// linearly interpolated at source/receiver depths.
struct ModeSet {
  double frequency_hz = 0.0;
  std::vector<double> wavenumbers;  // k_m, strictly decreasing, rad/m
  std::vector<std::vector<double>> mode_functions;  // [mode][depth index]
  double depth_step_m = 1.0;

  std::size_t mode_count() const { return wavenumbers.size(); }
  double mode_function_at(std::size_t m, double z_m) const;
};

ModeSet solve_modes(const Environment& env, double f_hz);

// Pekeris characteristic function whose roots in gamma (vertical
// wavenumber in water) are the trapped modes. Exposed so tests can run an
// independent dense-grid root scan against the solver.
double pekeris_characteristic(const Environment& env, double f_hz,
                              double gamma);

// Far-field modal sum: sum_m Psi_m(z_s) Psi_m(z_r) e^{i k_m r} / sqrt(k_m r).
std::complex<double> pressure(const ModeSet& modes, double z_src_m,
                              double z_rcv_m, double range_m);

struct TruthSample {
  double range_m = 0.0;
  double range_rate_mps = 0.0;
};

// Complex tonal samples per snapshot and tone, plus optional per-snapshot
// kinematic truth. `carrier_phase` records whether samples include the
// inter-snapshot carrier advance exp(i 2 pi f n t_delta) (true for series
// extracted from audio, false for fields synthesized in the range domain).
struct PressureFieldSeries {
  std::vector<double> tones_hz;
  double snapshot_interval_s = 1.0;
  // samples[n][f]; n indexes snapshots, f indexes tones_hz.
  std::vector<std::vector<std::complex<double>>> samples;
  std::vector<TruthSample> truth;  // empty or samples.size() entries
  bool carrier_phase = false;

  std::size_t snapshot_count() const { return samples.size(); }
  bool has_truth() const { return !truth.empty(); }
};

// Per-snapshot source/receiver geometry sampled at the snapshot interval.
struct GeometrySeries {
  double source_depth_m = 9.0;
  double receiver_depth_m = 150.0;
  double snapshot_interval_s = 1.0;
  std::vector<TruthSample> truth;  // horizontal range and range rate
};

// snr_db = tone power over per-bin noise power, time-averaged over the run
// and pooled across tones; +inf disables noise. Pure function of its
// arguments and the seed.
PressureFieldSeries synthesize_series(const Environment& env,
                                      const GeometrySeries& geometry,
                                      const std::vector<double>& tones_hz,
                                      double snr_db, std::uint64_t seed);

}  // namespace swnav::waveguide
