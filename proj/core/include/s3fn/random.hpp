#pragma once

#include <cstdint>
#include <random>

namespace s3fn {

/// Mixes a base seed with a stream index (splitmix64 finalizer) so that
/// independent workers (cubes, layers) get decorrelated, reproducible seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded random source. The distributions are implemented here rather than
/// taken from <random> because the standard leaves their algorithms
/// unspecified, and artifacts must be byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, one cached spare).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace s3fn
