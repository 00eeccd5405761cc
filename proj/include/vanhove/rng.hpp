#pragma once

#include <cstdint>

#include "vanhove/kernels.hpp"

namespace vanhove {

/// Counter-based splitmix64 stream.
///
/// Draw i (0-based) is mix(seed + (i + 1) * 0x9E3779B97F4A7C15) with the
/// standard splitmix64 finalizer, so any draw can be computed independently
/// and other languages can reproduce the stream bit for bit.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

  static std::uint64_t mix(std::uint64_t z) noexcept;
  std::uint64_t at(std::uint64_t i) const noexcept { return mix(seed_ + (i + 1) * 0x9E3779B97F4A7C15ULL); }

  std::uint64_t next_u64() noexcept { return at(counter_++); }
  // (x >> 11) * 2^-53, in [0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Box-Muller from two consecutive uniforms.
  double normal() noexcept;
  complex complex_normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

// A A^dagger / trace for a complex Gaussian A: Hermitian, positive, unit trace.
ComplexMatrix random_density_matrix(CounterRng& rng, Eigen::Index n);
// (A + A^dagger) / 2 for a complex Gaussian A.
ComplexMatrix random_hermitian(CounterRng& rng, Eigen::Index n);
// QR of a complex Gaussian matrix with the R diagonal made positive.
ComplexMatrix random_unitary(CounterRng& rng, Eigen::Index n);

}  // namespace vanhove
