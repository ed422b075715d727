#pragma once

#include <cstdint>
#include <random>

#include "japc/normal.hpp"

namespace japc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic pseudo-random stream. The same (seed, stream) pair yields
/// the same draw sequence on every platform: mt19937_64 is fully specified
/// by the standard, and all variates are derived with explicit arithmetic
/// rather than implementation-defined <random> distributions.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed;
    std::uint64_t mixed = detail::splitmix64(s);
    mixed ^= 0xD2B74407B1CE6E93ull * (stream + 1);
    std::uint64_t s2 = mixed;
    engine_.seed(detail::splitmix64(s2));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1); never returns an exact endpoint.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via inverse-CDF sampling.
  double normal() { return inverse_normal_cdf(uniform01()); }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace japc
