#pragma once

#include <stdexcept>
#include <string>

namespace swnav {

enum class ErrorKind {
  config,
  io,
  no_trapped_modes,
  non_convergence,
  range_too_small,
  tone_out_of_band,
  too_few_samples,
  unsupported_encoding,
  corrupt_header,
  empty_bin_set,
  insufficient_history,
  no_peak_in_band,
  non_positive_range,
  insufficient_coverage,
  no_valid_pairs,
  all_candidates_invalid,
  weight_collapse,
};

// Single exception type for the whole library; the C boundary maps kind()
// to a status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::no_trapped_modes: return "no_trapped_modes";
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::range_too_small: return "range_too_small";
    case ErrorKind::tone_out_of_band: return "tone_out_of_band";
    case ErrorKind::too_few_samples: return "too_few_samples";
    case ErrorKind::unsupported_encoding: return "unsupported_encoding";
    case ErrorKind::corrupt_header: return "corrupt_header";
    case ErrorKind::empty_bin_set: return "empty_bin_set";
    case ErrorKind::insufficient_history: return "insufficient_history";
    case ErrorKind::no_peak_in_band: return "no_peak_in_band";
    case ErrorKind::non_positive_range: return "non_positive_range";
    case ErrorKind::insufficient_coverage: return "insufficient_coverage";
    case ErrorKind::no_valid_pairs: return "no_valid_pairs";
    case ErrorKind::all_candidates_invalid: return "all_candidates_invalid";
    case ErrorKind::weight_collapse: return "weight_collapse";
  }
  return "unknown";
}

}  // namespace swnav
