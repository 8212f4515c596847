#pragma once

#include <cstdint>
#include <random>

namespace spinbus {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to derive child seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for stream `index` under `master`; independent of evaluation order.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Platform-stable random source: std::mt19937_64 (its output sequence is
/// fixed by the standard), uniforms from the top 53 bits, and normals from
/// the Box-Muller transform. std::normal_distribution is avoided because its
/// algorithm differs between standard libraries.
class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in (0, 1].
  double uniform_open_low() noexcept { return 1.0 - uniform(); }
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace spinbus
