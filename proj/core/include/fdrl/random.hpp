#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace fdrl {

// Stable 64-bit mixer used to derive independent sub-stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for the sub-stream `stream` of a master seed. Distinct streams give
// statistically independent sequences.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

// Deterministic random stream. Distributions are implemented here rather than
// taken from <random> so that sequences are identical across standard
// libraries (std::normal_distribution is implementation-defined).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n). n must be positive.
  std::size_t index(std::size_t n);
  // Standard normal (Box-Muller, caches the second variate).
  double normal();
  // Circularly symmetric complex Gaussian with unit variance.
  std::complex<double> complex_normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fdrl
