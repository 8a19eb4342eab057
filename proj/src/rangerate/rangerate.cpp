#include "rangerate/rangerate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/fft.hpp"

namespace swnav::rangerate {

using std::numbers::pi;

void RangeRateConfig::validate() const {
  if (segment_half_len < 8)
    throw Error(ErrorKind::config, "segment_half_len must be at least 8");
  if (!(tone_hz > 0.0)) throw Error(ErrorKind::config, "tone_hz must be positive");
  if (!(sound_speed_mps > 0.0))
    throw Error(ErrorKind::config, "sound_speed_mps must be positive");
  if (zero_pad_factor < 1 || zero_pad_factor > 64)
    throw Error(ErrorKind::config, "zero_pad_factor must lie in [1, 64]");
  if (!(band_min_mps < band_max_mps))
    throw Error(ErrorKind::config, "search band is empty");
}

double phase_offset_mps(double f_hz, double t_delta_s, double v_mps) {
  const double cycles = f_hz * t_delta_s;
  if (!(cycles > 0.0))
    throw Error(ErrorKind::config, "f * t_delta must be positive");
  return v_mps * (std::round(cycles) - cycles) / cycles;
}

std::vector<double> difference_product(
    const waveguide::PressureFieldSeries& series, std::size_t n,
    std::size_t half_len, std::size_t tone_index) {
  if (n < half_len || n + half_len >= series.snapshot_count())
    throw Error(ErrorKind::insufficient_history,
                "difference product needs snapshots " +
                    std::to_string(n) + " +/- " + std::to_string(half_len));
  if (tone_index >= series.tones_hz.size())
    throw Error(ErrorKind::config, "tone index out of range");

  std::vector<double> ic(half_len + 1);
  for (std::size_t k = 0; k <= half_len; ++k) {
    const auto a = series.samples[n - k][tone_index];
    const auto b = series.samples[n + k][tone_index];
    ic[k] = (a * std::conj(b)).real();
  }
  return ic;
}

namespace {

double ls_slope(std::span<const double> y, double t_delta_s) {
  const auto n = static_cast<double>(y.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(i) * t_delta_s;
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// All range rates whose folded digital frequency equals w, inside the band.
void band_candidates(double w, const RangeRateConfig& cfg, double t_delta_s,
                     double offset_mps, std::vector<double>& out) {
  out.clear();
  const double scale =
      cfg.sound_speed_mps / (4.0 * pi * cfg.tone_hz * t_delta_s);
  for (int sign : {1, -1}) {
    for (int m = -3; m <= 3; ++m) {
      const double w_phys = sign * w + 2.0 * pi * static_cast<double>(m);
      const double rdot = w_phys * scale - offset_mps;
      if (rdot >= cfg.band_min_mps && rdot <= cfg.band_max_mps)
        out.push_back(rdot);
    }
  }
}

}  // namespace

RangeRateEstimate estimate_range_rate(std::span<const double> ic,
                                      const RangeRateConfig& cfg,
                                      double t_delta_s, double offset_mps,
                                      std::optional<double> hint_mps) {
  cfg.validate();
  if (ic.size() < 2)
    throw Error(ErrorKind::too_few_samples, "difference product too short");
  if (!(t_delta_s > 0.0))
    throw Error(ErrorKind::config, "t_delta must be positive");

  const std::size_t n_fft = cfg.zero_pad_factor * ic.size();
  std::vector<std::complex<double>> padded(n_fft, {0.0, 0.0});
  for (std::size_t k = 0; k < ic.size(); ++k) padded[k] = ic[k];
  const auto spectrum = fft_forward(padded);

  const std::size_t half = n_fft / 2;
  std::vector<double> cands;
  std::size_t best_bin = 0;
  double best_mag = -1.0;
  for (std::size_t j = 0; j <= half; ++j) {
    const double w = 2.0 * pi * static_cast<double>(j) /
                     static_cast<double>(n_fft);
    band_candidates(w, cfg, t_delta_s, offset_mps, cands);
    if (cands.empty()) continue;
    const double mag = std::norm(spectrum[j]);
    if (mag > best_mag) {
      best_mag = mag;
      best_bin = j;
    }
  }
  if (best_mag < 0.0)
    throw Error(ErrorKind::no_peak_in_band,
                "no spectrum bin maps into the search band");

  double w_peak = 2.0 * pi * static_cast<double>(best_bin) /
                  static_cast<double>(n_fft);
  if (best_bin > 0 && best_bin < half) {
    const double y1 = std::norm(spectrum[best_bin - 1]);
    const double y2 = best_mag;
    const double y3 = std::norm(spectrum[best_bin + 1]);
    const double denom = y1 - 2.0 * y2 + y3;
    if (denom < 0.0) {
      const double shift = 0.5 * (y1 - y3) / denom;
      if (std::abs(shift) <= 0.5)
        w_peak += shift * 2.0 * pi / static_cast<double>(n_fft);
    }
  }

  band_candidates(w_peak, cfg, t_delta_s, offset_mps, cands);
  if (cands.empty()) {
    // Refinement nudged the peak just outside the band; fall back to the
    // bin-center candidates, which exist by construction.
    const double w_bin = 2.0 * pi * static_cast<double>(best_bin) /
                         static_cast<double>(n_fft);
    band_candidates(w_bin, cfg, t_delta_s, offset_mps, cands);
  }

  double chosen = cands.front();
  for (double c : cands) {
    const bool better = hint_mps ? std::abs(c - *hint_mps) <
                                       std::abs(chosen - *hint_mps)
                                 : std::abs(c) < std::abs(chosen);
    if (better) chosen = c;
  }

  RangeRateEstimate out;
  out.range_rate_mps = chosen;
  out.bin_width_mps = cfg.sound_speed_mps /
                      (2.0 * static_cast<double>(n_fft) * cfg.tone_hz *
                       t_delta_s);
  return out;
}

RangeRateTrack compute_track(const waveguide::PressureFieldSeries& series,
                             const RangeRateConfig& cfg) {
  cfg.validate();
  const std::size_t l = cfg.segment_half_len;
  if (series.snapshot_count() < 2 * l + 1)
    throw Error(ErrorKind::too_few_samples,
                "series shorter than one difference segment");

  std::size_t tone_index = series.tones_hz.size();
  for (std::size_t t = 0; t < series.tones_hz.size(); ++t)
    if (std::abs(series.tones_hz[t] - cfg.tone_hz) < 1e-6)
      tone_index = t;
  if (tone_index == series.tones_hz.size())
    throw Error(ErrorKind::config,
                "configured tone not present in the series");

  const double offset =
      series.carrier_phase
          ? phase_offset_mps(cfg.tone_hz, series.snapshot_interval_s,
                             cfg.sound_speed_mps)
          : 0.0;

  RangeRateTrack track;
  track.segment_half_len = l;
  track.t_delta_s = series.snapshot_interval_s;
  track.first_center = l;
  track.last_center = series.snapshot_count() - 1 - l;
  track.smoothed.reserve(track.last_center - track.first_center + 1);

  // The hint extrapolates the recent trend one step ahead. A plain
  // last-value hint reflects off spectral folds: the two branch candidates
  // are mirror images about the fold and the stale value always sits on
  // the approaching side.
  std::optional<double> hint;
  for (std::size_t m = track.first_center; m <= track.last_center; ++m) {
    const auto ic = difference_product(series, m, l, tone_index);
    const auto est =
        estimate_range_rate(ic, cfg, track.t_delta_s, offset, hint);
    track.smoothed.push_back(est.range_rate_mps);
    track.bin_width_mps = est.bin_width_mps;

    const auto& sm = track.smoothed;
    double next = sm.back();
    if (sm.size() >= 2) {
      const std::size_t wlen = std::min(sm.size(), l + 1);
      const std::span<const double> win(sm.data() + (sm.size() - wlen),
                                        wlen);
      next += ls_slope(win, track.t_delta_s) * track.t_delta_s;
    }
    hint = std::clamp(next, cfg.band_min_mps, cfg.band_max_mps);
  }
  return track;
}

double predict_realtime(std::span<const double> y_window, double t_delta_s) {
  if (y_window.size() < 2)
    throw Error(ErrorKind::insufficient_history,
                "prediction needs at least two range-rate samples");
  if (!(t_delta_s > 0.0))
    throw Error(ErrorKind::config, "t_delta must be positive");
  const double slope = ls_slope(y_window, t_delta_s);
  const double steps = static_cast<double>(y_window.size() - 1);
  return y_window.back() + slope * steps * t_delta_s;
}

double realtime_estimate(const RangeRateTrack& track, std::size_t n) {
  const std::size_t l = track.segment_half_len;
  if (n < 3 * l || n - 2 * l < track.first_center ||
      n - l > track.last_center)
    throw Error(ErrorKind::insufficient_history,
                "realtime estimate needs centers n-2L..n-L");
  const std::size_t begin = n - 2 * l - track.first_center;
  return predict_realtime(
      std::span<const double>(track.smoothed.data() + begin, l + 1),
      track.t_delta_s);
}

std::vector<double> realtime_rate_series(const RangeRateTrack& track,
                                         std::size_t n) {
  const std::size_t l = track.segment_half_len;
  if (n < 3 * l || n - l > track.last_center)
    throw Error(ErrorKind::insufficient_history,
                "rate series needs centers up to n-L");

  // Slope at the newest available center, for the unmeasured tail.
  const std::size_t begin = n - 2 * l - track.first_center;
  const std::span<const double> window(track.smoothed.data() + begin, l + 1);
  const double z_n = predict_realtime(window, track.t_delta_s);
  const double newest = track.smoothed_at(n - l);
  const double slope_per_step =
      (z_n - newest) / static_cast<double>(l);

  std::vector<double> rate(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < track.first_center) {
      rate[i] = track.smoothed.front();
    } else if (i <= n - l) {
      rate[i] = track.smoothed_at(i);
    } else {
      rate[i] = newest + slope_per_step * static_cast<double>(i - (n - l));
    }
  }
  return rate;
}

std::size_t first_realtime_index(const RangeRateTrack& track) {
  return 3 * track.segment_half_len;
}

void write_rangerate_csv(const std::filesystem::path& path,
                         const RangeRateTrack& track,
                         const std::vector<waveguide::TruthSample>& truth) {
  CsvWriter csv(path);
  csv.header({"time_s", "y_rdot_mps", "z_rdot_mps", "truth_rdot_mps"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t m = track.first_center; m <= track.last_center; ++m) {
    double z = nan;
    if (m >= first_realtime_index(track) &&
        m - track.segment_half_len <= track.last_center)
      z = realtime_estimate(track, m);
    const double t = truth.size() > m ? truth[m].range_rate_mps : nan;
    csv.row({static_cast<double>(m) * track.t_delta_s, track.smoothed_at(m),
             z, t});
  }
}

}  // namespace swnav::rangerate
