#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "core/error.hpp"
#include "rangerate/rangerate.hpp"

using namespace swnav;
using namespace swnav::rangerate;
using std::numbers::pi;

namespace {

// One trapped mode with horizontal wavenumber 2 pi f / v, so the mean
// phase speed equals the water sound speed exactly.
waveguide::PressureFieldSeries single_mode_series(
    double f_hz, double v_mps, double t_delta_s,
    const std::vector<double>& ranges, double amplitude = 1.0) {
  waveguide::PressureFieldSeries s;
  s.tones_hz = {f_hz};
  s.snapshot_interval_s = t_delta_s;
  s.carrier_phase = false;
  const double k = 2.0 * pi * f_hz / v_mps;
  for (double r : ranges) {
    s.samples.push_back({amplitude * std::polar(1.0, k * r)});
    s.truth.push_back({r, 0.0});
  }
  return s;
}

std::vector<double> linear_ranges(std::size_t n, double r0, double rdot,
                                  double t_delta) {
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = r0 + rdot * static_cast<double>(i) * t_delta;
  return r;
}

RangeRateConfig test_config(double t_unused = 0.0) {
  (void)t_unused;
  RangeRateConfig cfg;
  cfg.segment_half_len = 120;
  cfg.tone_hz = 109.0;
  cfg.sound_speed_mps = 1500.0;
  cfg.zero_pad_factor = 16;
  cfg.band_min_mps = 0.0;
  cfg.band_max_mps = 10.0;
  return cfg;
}

}  // namespace

TEST_CASE("phase offset reproduces the worked carrier value") {
  const double t_delta = 3276.0 / 3276.8;
  const double off = phase_offset_mps(109.0, t_delta, 1500.0);
  CHECK(off == doctest::Approx(0.3663).epsilon(1e-3));
  CHECK(off > 0.0);

  CHECK(phase_offset_mps(100.0, 0.5, 1500.0) == doctest::Approx(0.0));
  CHECK(phase_offset_mps(109.0, t_delta, 3000.0) ==
        doctest::Approx(2.0 * off).epsilon(1e-12));
}

TEST_CASE("difference product matches the single-mode cosine form") {
  const double f = 109.0, v = 1500.0, t_delta = 0.4, rdot = 1.7;
  const std::size_t l = 40, n = 60;
  const auto series = single_mode_series(
      f, v, t_delta, linear_ranges(2 * n, 3000.0, rdot, t_delta));

  const auto ic = difference_product(series, n, l, 0);
  REQUIRE(ic.size() == l + 1);
  const double k1 = 2.0 * pi * f / v;
  for (std::size_t k = 0; k <= l; ++k)
    CHECK(ic[k] == doctest::Approx(std::cos(2.0 * k1 * rdot * t_delta *
                                            static_cast<double>(k)))
                       .epsilon(1e-12));
  CHECK(ic[0] == doctest::Approx(std::norm(series.samples[n][0])));

  const auto still = single_mode_series(
      f, v, t_delta, std::vector<double>(2 * n, 2500.0));
  const auto flat = difference_product(still, n, l, 0);
  for (double x : flat) CHECK(x == doctest::Approx(flat[0]).epsilon(1e-12));

  CHECK_THROWS_AS(difference_product(series, l - 1, l, 0), Error);
  CHECK_THROWS_AS(difference_product(series, 2 * n - l, l, 0), Error);
  CHECK_THROWS_AS(difference_product(series, n, l, 1), Error);
}

TEST_CASE("range rate recovered within a hundredth over the band") {
  const double t_delta = 0.4;
  RangeRateConfig cfg = test_config();
  for (double rdot : {0.5, 2.0, 5.0}) {
    const auto series = single_mode_series(
        cfg.tone_hz, cfg.sound_speed_mps, t_delta,
        linear_ranges(2 * cfg.segment_half_len + 1, 2000.0, rdot, t_delta));
    const auto ic = difference_product(series, cfg.segment_half_len,
                                       cfg.segment_half_len, 0);
    const auto est = estimate_range_rate(ic, cfg, t_delta, 0.0);
    CHECK(std::abs(est.range_rate_mps - rdot) <= 0.01);
  }
}

TEST_CASE("zero range rate maps to the dc bin") {
  const double t_delta = 0.4;
  RangeRateConfig cfg = test_config();
  const auto series = single_mode_series(
      cfg.tone_hz, cfg.sound_speed_mps, t_delta,
      std::vector<double>(2 * cfg.segment_half_len + 1, 3000.0));
  const auto ic = difference_product(series, cfg.segment_half_len,
                                     cfg.segment_half_len, 0);
  const auto est = estimate_range_rate(ic, cfg, t_delta, 0.0);
  CHECK(std::abs(est.range_rate_mps) <= est.bin_width_mps);
}

TEST_CASE("spectrum symmetry leaves sign choice to the band") {
  const double t_delta = 0.4, rdot = -2.0;
  RangeRateConfig cfg = test_config();
  const auto series = single_mode_series(
      cfg.tone_hz, cfg.sound_speed_mps, t_delta,
      linear_ranges(2 * cfg.segment_half_len + 1, 4000.0, rdot, t_delta));
  const auto ic = difference_product(series, cfg.segment_half_len,
                                     cfg.segment_half_len, 0);

  cfg.band_min_mps = -10.0;
  cfg.band_max_mps = 0.0;
  const auto neg = estimate_range_rate(ic, cfg, t_delta, 0.0);
  CHECK(std::abs(neg.range_rate_mps - rdot) <= 0.01);

  cfg.band_min_mps = 0.0;
  cfg.band_max_mps = 10.0;
  const auto pos = estimate_range_rate(ic, cfg, t_delta, 0.0);
  CHECK(std::abs(pos.range_rate_mps + rdot) <= 0.01);
}

TEST_CASE("estimate is invariant to global amplitude scaling") {
  const double t_delta = 0.4, rdot = 1.3;
  RangeRateConfig cfg = test_config();
  const auto ranges =
      linear_ranges(2 * cfg.segment_half_len + 1, 2500.0, rdot, t_delta);
  const auto a = single_mode_series(cfg.tone_hz, cfg.sound_speed_mps,
                                    t_delta, ranges, 1.0);
  const auto b = single_mode_series(cfg.tone_hz, cfg.sound_speed_mps,
                                    t_delta, ranges, 7.25);
  const auto ia = difference_product(a, cfg.segment_half_len,
                                     cfg.segment_half_len, 0);
  const auto ib = difference_product(b, cfg.segment_half_len,
                                     cfg.segment_half_len, 0);
  const auto ea = estimate_range_rate(ia, cfg, t_delta, 0.0);
  const auto eb = estimate_range_rate(ib, cfg, t_delta, 0.0);
  CHECK(ea.range_rate_mps == doctest::Approx(eb.range_rate_mps).epsilon(1e-12));
}

TEST_CASE("unpadded resolution lands near a tenth with sixty snapshots") {
  RangeRateConfig cfg = test_config();
  cfg.segment_half_len = 60;
  cfg.zero_pad_factor = 1;
  const double t_delta = 3276.0 / 3276.8;
  std::vector<double> ic(cfg.segment_half_len + 1, 1.0);
  const auto est = estimate_range_rate(ic, cfg, t_delta, 0.0);
  CHECK(est.bin_width_mps == doctest::Approx(0.1128).epsilon(1e-3));
}

TEST_CASE("carrier offset is removed on carrier-bearing series") {
  // Framed audio of cos(2 pi f t - k r(t)): snapshot n carries the
  // carrier advance exp(+j 2 pi f n t_delta) on top of exp(-j k r_n).
  const double t_delta = 3276.0 / 3276.8;
  RangeRateConfig cfg = test_config();
  const double rdot = 2.0;
  const auto ranges =
      linear_ranges(2 * cfg.segment_half_len + 1, 3000.0, rdot, t_delta);

  waveguide::PressureFieldSeries series;
  series.tones_hz = {cfg.tone_hz};
  series.snapshot_interval_s = t_delta;
  series.carrier_phase = true;
  const double k = 2.0 * pi * cfg.tone_hz / cfg.sound_speed_mps;
  for (std::size_t n = 0; n < ranges.size(); ++n)
    series.samples.push_back({std::polar(
        1.0,
        2.0 * pi * cfg.tone_hz * static_cast<double>(n) * t_delta -
            k * ranges[n])});

  const auto track = compute_track(series, cfg);
  for (double y : track.smoothed) CHECK(std::abs(y - rdot) <= 0.02);
}

TEST_CASE("track follows a slow ramp through the spectral fold") {
  // At one-second snapshots the digital frequency folds near 3.44 m/s;
  // continuity with earlier estimates must pick the unfolded branch.
  const double t_delta = 1.0;
  RangeRateConfig cfg = test_config();
  const std::size_t count = 1200;
  const double rdot0 = 3.0, accel = (3.85 - 3.0) / 1200.0;
  std::vector<double> ranges(count), rdots(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) * t_delta;
    ranges[i] = 2000.0 + rdot0 * t + 0.5 * accel * t * t;
    rdots[i] = rdot0 + accel * t;
  }
  const auto series = single_mode_series(cfg.tone_hz, cfg.sound_speed_mps,
                                         t_delta, ranges);
  const auto track = compute_track(series, cfg);
  for (std::size_t m = track.first_center; m <= track.last_center; ++m)
    CHECK(std::abs(track.smoothed_at(m) - rdots[m]) <= 0.02);
}

TEST_CASE("linear prediction is exact on affine range-rate histories") {
  const double t_delta = 0.8;
  std::vector<double> flat(121, 1.5);
  CHECK(predict_realtime(flat, t_delta) == doctest::Approx(1.5));

  std::vector<double> ramp(121);
  for (std::size_t i = 0; i < ramp.size(); ++i)
    ramp[i] = 0.3 + 0.01 * static_cast<double>(i) * t_delta;
  // Extrapolating 120 steps past the window end continues the line.
  const double expected = 0.3 + 0.01 * (120.0 + 120.0) * t_delta;
  CHECK(predict_realtime(ramp, t_delta) ==
        doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(predict_realtime(std::vector<double>{1.0}, t_delta), Error);
}

TEST_CASE("prediction error is curvature-limited on the cpa geometry") {
  // Truth geometry: source at (2000, 0) moving (0, 5.14); receiver from
  // origin at (1.1, 1.1). The least-squares slope lags the anchor by L/2
  // steps, which doubles the plain Taylor remainder, so the bound is
  // max|jerk| * (L t_delta)^2.
  const double t_delta = 1.0;
  const std::size_t l = 120, count = 1200;
  auto range_at = [](double t) {
    const double dx = 2000.0 - 1.1 * t, dy = 5.14 * t - 1.1 * t;
    return std::hypot(dx, dy);
  };
  auto rdot_at = [&](double t) {
    const double dx = 2000.0 - 1.1 * t, dy = 4.04 * t;
    return (-1.1 * dx + 4.04 * dy) / range_at(t);
  };

  std::vector<double> y(count);
  for (std::size_t i = 0; i < count; ++i)
    y[i] = rdot_at(static_cast<double>(i) * t_delta);

  double max_jerk = 0.0;
  for (std::size_t i = 1; i + 1 < count; ++i) {
    const double j = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (t_delta * t_delta);
    max_jerk = std::max(max_jerk, std::abs(j));
  }

  double worst = 0.0;
  for (std::size_t n = 3 * l; n < count; ++n) {
    const std::span<const double> window(y.data() + n - 2 * l, l + 1);
    const double z = predict_realtime(window, t_delta);
    worst = std::max(worst, std::abs(z - y[n]));
  }
  const double bound =
      max_jerk * (static_cast<double>(l) * t_delta) *
      (static_cast<double>(l) * t_delta);
  CHECK(worst > 1e-4);  // the check has teeth
  CHECK(worst <= bound);
}

TEST_CASE("realtime series blends measured and extrapolated rates") {
  const double t_delta = 1.0;
  RangeRateConfig cfg = test_config();
  cfg.segment_half_len = 20;
  const std::size_t l = cfg.segment_half_len, count = 200;
  const double rdot = 2.0;
  const auto series = single_mode_series(
      cfg.tone_hz, cfg.sound_speed_mps, t_delta,
      linear_ranges(count, 2000.0, rdot, t_delta));
  const auto track = compute_track(series, cfg);
  CHECK(first_realtime_index(track) == 3 * l);

  const std::size_t n = 150;
  const auto rate = realtime_rate_series(track, n);
  REQUIRE(rate.size() == n);
  for (std::size_t i = 0; i < l; ++i)
    CHECK(rate[i] == track.smoothed.front());
  for (std::size_t i = l; i + l <= n; ++i)
    CHECK(rate[i] == track.smoothed_at(i));
  for (std::size_t i = n - l + 1; i + 1 < n; ++i)
    CHECK(rate[i + 1] - rate[i] ==
          doctest::Approx(rate[i] - rate[i - 1]).epsilon(1e-9));
  CHECK(std::abs(rate[n - 1] - rdot) <= 0.02);

  CHECK_THROWS_AS(realtime_rate_series(track, 3 * l - 1), Error);
  CHECK(realtime_estimate(track, 3 * l) ==
        doctest::Approx(rdot).epsilon(0.02));
}
