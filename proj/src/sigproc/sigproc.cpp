#include "sigproc/sigproc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/fft.hpp"

namespace swnav::sigproc {

using std::numbers::pi;

void DftConfig::validate() const {
  if (!(sample_rate_hz > 0.0))
    throw Error(ErrorKind::config, "sample_rate_hz must be positive");
  if (n_dft == 0) throw Error(ErrorKind::config, "n_dft must be positive");
  if (!(overlap >= 0.0) || overlap >= 1.0)
    throw Error(ErrorKind::config, "overlap must lie in [0, 1)");
  const double hop_f = (1.0 - overlap) * static_cast<double>(n_dft);
  const double rounded = std::round(hop_f);
  if (rounded < 1.0 || std::abs(hop_f - rounded) > 1e-9 * hop_f)
    throw Error(ErrorKind::config,
                "(1 - overlap) * n_dft must be a whole number of samples");
}

std::size_t DftConfig::hop() const {
  validate();
  return static_cast<std::size_t>(
      std::llround((1.0 - overlap) * static_cast<double>(n_dft)));
}

double DftConfig::snapshot_interval_s() const {
  return static_cast<double>(hop()) / sample_rate_hz;
}

std::size_t nearest_bin(double tone_hz, const DftConfig& cfg) {
  const double nyquist = cfg.sample_rate_hz / 2.0;
  if (!(tone_hz >= 0.0) || tone_hz >= nyquist)
    throw Error(ErrorKind::tone_out_of_band,
                "tone " + std::to_string(tone_hz) + " Hz outside [0, " +
                    std::to_string(nyquist) + ")");
  const auto bin = static_cast<std::size_t>(std::llround(
      tone_hz * static_cast<double>(cfg.n_dft) / cfg.sample_rate_hz));
  if (bin >= cfg.n_dft / 2)
    throw Error(ErrorKind::tone_out_of_band,
                "tone rounds to the Nyquist bin");
  return bin;
}

FramedSeries frame_and_dft(std::span<const std::complex<double>> raw,
                           const DftConfig& cfg,
                           const std::vector<double>& tones_hz) {
  const std::size_t hop = cfg.hop();
  if (raw.size() < cfg.n_dft)
    throw Error(ErrorKind::too_few_samples,
                "need at least n_dft samples, got " +
                    std::to_string(raw.size()));

  std::vector<std::size_t> tone_bins;
  tone_bins.reserve(tones_hz.size());
  for (double f : tones_hz) tone_bins.push_back(nearest_bin(f, cfg));

  const std::size_t n = cfg.n_dft;
  std::vector<double> window(n, 1.0);
  if (cfg.window == WindowKind::hann)
    for (std::size_t s = 0; s < n; ++s)
      window[s] =
          0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(s) /
                               static_cast<double>(n));

  const std::size_t n_snap = (raw.size() - n) / hop + 1;
  const std::size_t n_bins = n / 2 + 1;  // one-sided incl. DC and Nyquist

  FramedSeries out;
  out.series.tones_hz = tones_hz;
  out.series.snapshot_interval_s = cfg.snapshot_interval_s();
  out.series.carrier_phase = true;
  out.series.samples.resize(n_snap);
  out.spectrogram.snapshot_interval_s = out.series.snapshot_interval_s;
  out.spectrogram.provenance = Provenance::wav;
  out.spectrogram.intensity.resize(n_snap);
  out.spectrogram.bin_freqs_hz.resize(n_bins);
  for (std::size_t j = 0; j < n_bins; ++j)
    out.spectrogram.bin_freqs_hz[j] = static_cast<double>(j) *
                                      cfg.sample_rate_hz /
                                      static_cast<double>(n);

  std::vector<std::complex<double>> frame(n);
  for (std::size_t s = 0; s < n_snap; ++s) {
    const std::size_t start = s * hop;
    for (std::size_t i = 0; i < n; ++i) frame[i] = raw[start + i] * window[i];
    const auto spectrum = fft_forward(frame);

    auto& row = out.spectrogram.intensity[s];
    row.resize(n_bins);
    for (std::size_t j = 0; j < n_bins; ++j) row[j] = std::norm(spectrum[j]);

    auto& tonal = out.series.samples[s];
    tonal.resize(tone_bins.size());
    for (std::size_t t = 0; t < tone_bins.size(); ++t)
      tonal[t] = spectrum[tone_bins[t]];
  }
  return out;
}

FramedSeries frame_and_dft(std::span<const double> raw, const DftConfig& cfg,
                           const std::vector<double>& tones_hz) {
  std::vector<std::complex<double>> cx(raw.begin(), raw.end());
  return frame_and_dft(std::span<const std::complex<double>>(cx), cfg,
                       tones_hz);
}

double estimate_snr(const Spectrogram& spec,
                    const std::vector<std::size_t>& tone_bins,
                    const std::vector<std::size_t>& noise_bins) {
  if (tone_bins.empty() || noise_bins.empty())
    throw Error(ErrorKind::empty_bin_set, "tone and noise bin sets required");
  for (std::size_t t : tone_bins)
    if (std::find(noise_bins.begin(), noise_bins.end(), t) != noise_bins.end())
      throw Error(ErrorKind::config, "tone and noise bins overlap");
  if (spec.intensity.empty())
    throw Error(ErrorKind::too_few_samples, "empty spectrogram");

  double tone_sum = 0.0, noise_sum = 0.0;
  for (const auto& row : spec.intensity) {
    for (std::size_t b : tone_bins) {
      if (b >= row.size())
        throw Error(ErrorKind::config, "tone bin out of range");
      tone_sum += row[b];
    }
    for (std::size_t b : noise_bins) {
      if (b >= row.size())
        throw Error(ErrorKind::config, "noise bin out of range");
      noise_sum += row[b];
    }
  }
  const double n_rows = static_cast<double>(spec.intensity.size());
  const double tone_mean =
      tone_sum / (n_rows * static_cast<double>(tone_bins.size()));
  const double noise_mean =
      noise_sum / (n_rows * static_cast<double>(noise_bins.size()));
  if (noise_mean <= 0.0) return 300.0;
  return std::min(10.0 * std::log10(tone_mean / noise_mean), 300.0);
}

std::vector<std::size_t> default_noise_bins(
    std::size_t bin_count, const std::vector<std::size_t>& tone_bins,
    std::size_t guard_bins) {
  std::vector<std::size_t> out;
  for (std::size_t b = 1; b + 1 < bin_count; ++b) {  // skip DC and Nyquist
    bool near_tone = false;
    for (std::size_t t : tone_bins)
      if (b + guard_bins >= t && b <= t + guard_bins) near_tone = true;
    if (!near_tone) out.push_back(b);
  }
  if (out.empty())
    throw Error(ErrorKind::empty_bin_set, "no noise bins left after guards");
  return out;
}

void write_spectrogram_csv(const Spectrogram& spec,
                           const std::filesystem::path& path) {
  CsvWriter csv(path);
  std::vector<std::string> head;
  head.reserve(spec.bin_freqs_hz.size());
  for (double f : spec.bin_freqs_hz) head.push_back(format_double(f));
  csv.row_strings(head);
  for (const auto& row : spec.intensity) csv.row(row);
}

}  // namespace swnav::sigproc
