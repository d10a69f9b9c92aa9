#include "subcompat/random.hpp"

#include <cmath>
#include <numbers>

namespace subcompat {
namespace {

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix(seed + 0x9e3779b97f4a7c15ULL) ^ mix(stream ^ 0xd1b54a32d192ed03ULL)) {}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t c = counter_++;
  return mix(key_ ^ mix(c * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

double CounterRng::uniform() {
  // 53 random bits, shifted off zero
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Complex CounterRng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re, im};
}

ComplexMatrix gaussian_matrix(Eigen::Index dim, Eigen::Index cols, std::uint64_t seed) {
  CounterRng rng(seed);
  ComplexMatrix g(dim, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = rng.complex_normal();
  }
  return g;
}

ComplexVector gaussian_unit_vector(Eigen::Index dim, std::uint64_t seed) {
  ComplexVector v = gaussian_matrix(dim, 1, seed).col(0);
  return v / v.norm();
}

}  // namespace subcompat
