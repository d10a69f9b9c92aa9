#pragma once

#include <cstdint>

#include "subcompat/linalg.hpp"

namespace subcompat {

/// Counter-based generator: draw i is a pure function of (seed, i), so any
/// stream position can be reproduced without replaying earlier draws.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on (0, 1).
  double uniform();
  /// Standard normal (Box-Muller).
  double normal();
  /// Real and imaginary parts independent N(0, 1).
  Complex complex_normal();

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// dim x cols matrix of independent complex Gaussians.
ComplexMatrix gaussian_matrix(Eigen::Index dim, Eigen::Index cols, std::uint64_t seed);
/// Normalized complex Gaussian vector of any dimension.
ComplexVector gaussian_unit_vector(Eigen::Index dim, std::uint64_t seed);

}  // namespace subcompat
