#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace swnav {

// Counter-based generator built on the splitmix64 mixer. Every consumer
// derives its own stream from (seed, stream id), so draws are reproducible
// regardless of thread scheduling and identical across platforms (no
// std::*_distribution, whose output is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ kGolden)) {}

  // Independent substream; id may be any label (trial index, particle
  // index, module tag hashed by the caller).
  Rng stream(std::uint64_t id) const {
    Rng r(0);
    r.state_ = mix(state_ ^ mix(id + kGolden));
    return r;
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  // Uniform on (0, 1): never returns 0, safe for log().
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller; draws two uniforms per call and discards the spare so the
  // counter advance per call is fixed.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace swnav
