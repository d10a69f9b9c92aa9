#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "subcompat/linalg.hpp"
#include "subcompat/quantum_compat.hpp"
#include "subcompat/random.hpp"
#include "support/oracles.hpp"

using namespace subcompat;

namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ComplexMatrix random_hermitian(int dim, std::uint64_t seed) {
  const ComplexMatrix g = gaussian_matrix(dim, dim, seed);
  return (g + g.adjoint()) / 2.0;
}

ComplexVector ghz3() {
  ComplexVector v = ComplexVector::Zero(8);
  v(0) = v(7) = 1.0 / std::sqrt(2.0);
  return v;
}

Complex inner(const ComplexVector& a, const ComplexVector& b) { return a.dot(b); }  // <a|b>

}  // namespace

TEST_CASE("tensor") {
  CHECK(max_abs(tensor(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)) - ComplexMatrix::Identity(4, 4)) ==
        0.0);
  const ComplexMatrix zz = tensor(pauli(3), pauli(3));
  Eigen::VectorXcd d(4);
  d << 1, -1, -1, 1;
  CHECK(max_abs(zz - ComplexMatrix(d.asDiagonal())) == 0.0);

  const auto r1 = sample_density(1, 2, 1);
  const auto r2 = sample_density(2, 3, 2);
  CHECK(std::abs(tensor(r1.matrix(), r2.matrix()).trace() - Complex(1, 0)) < 1e-12);

  const ComplexMatrix big = ComplexMatrix::Identity(128, 128);
  CHECK_THROWS_AS(tensor(big, big), ResourceError);
}

TEST_CASE("partial_trace") {
  const auto r1 = sample_density(1, 2, 3);
  const auto r2 = sample_density(1, 2, 4);
  const auto product = tensor(r1, r2);
  CHECK(max_abs(partial_trace(product, SubsetMask::of({1})).matrix() - r1.matrix()) < 1e-12);
  CHECK(max_abs(partial_trace(product, SubsetMask::of({2})).matrix() - r2.matrix()) < 1e-12);

  const auto ghz = DensityMatrix::pure(StateVector(ghz3()));
  const ComplexMatrix r12 = partial_trace(ghz, SubsetMask::of({1, 2})).matrix();
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = expected(3, 3) = 0.5;
  CHECK(max_abs(r12 - expected) < 1e-12);
  CHECK(max_abs(r12 - oracle::partial_trace_qubits(ghz.matrix(), SubsetMask::of({1, 2}))) < 1e-12);

  const auto mixed = DensityMatrix::maximally_mixed(3);
  CHECK(max_abs(partial_trace(mixed, SubsetMask::of({2})).matrix() - ComplexMatrix::Identity(2, 2) / 2.0) < 1e-12);

  CHECK_THROWS_AS(partial_trace(mixed, SubsetMask()), InputError);
  CHECK_THROWS_AS(partial_trace(mixed, SubsetMask::of({4})), InputError);
}

TEST_CASE("partial_trace agrees with digit contraction") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rho = sample_density(4, 1 + static_cast<int>(seed % 16), seed);
    for (std::uint32_t keep = 1; keep < 16; ++keep) {
      const ComplexMatrix ours = partial_trace(rho.matrix(), SubsetMask(keep));
      CHECK(max_abs(ours - oracle::partial_trace_qubits(rho.matrix(), SubsetMask(keep))) < 1e-12);
      CHECK(std::abs(ours.trace() - Complex(1, 0)) < 1e-12);
    }
  }
}

TEST_CASE("embed") {
  const auto rho1 = sample_density(1, 2, 5);
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  CHECK(max_abs(embed(rho1.matrix(), SubsetMask::of({1}), 3) - tensor(tensor(rho1.matrix(), i2), i2)) < 1e-15);
  CHECK(max_abs(embed(rho1.matrix(), SubsetMask::of({2}), 3) - tensor(tensor(i2, rho1.matrix()), i2)) < 1e-15);
  CHECK(max_abs(embed(ComplexMatrix(i2 / 2.0), SubsetMask::of({2}), 3) - ComplexMatrix::Identity(8, 8) / 2.0) == 0.0);

  const auto rho13 = sample_density(2, 4, 6);
  const ComplexMatrix e = embed(rho13.matrix(), SubsetMask::of({1, 3}), 4);
  CHECK(std::abs(e.trace() - Complex(4, 0)) < 1e-12);
  CHECK(max_abs(partial_trace(e, SubsetMask::of({1, 3})) / 4.0 - rho13.matrix()) < 1e-12);

  CHECK_THROWS_AS(embed(rho13.matrix(), SubsetMask::of({1}), 3), InputError);
  CHECK_THROWS_AS(embed(rho1.matrix(), SubsetMask::of({4}), 3), InputError);
}

TEST_CASE("embed then trace recovers the operator") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (std::uint32_t a = 1; a < 15; ++a) {
      const SubsetMask s(a);
      const auto rho = sample_density(s.size(), 2, seed * 100 + a);
      const ComplexMatrix e = embed(rho.matrix(), s, 4);
      CHECK(max_abs(partial_trace(e, s) / std::pow(2.0, 4 - s.size()) - rho.matrix()) < 1e-12);
    }
  }
}

TEST_CASE("pauli expansion") {
  const auto mixed = pauli_expand(DensityMatrix::maximally_mixed(3).matrix());
  CHECK(mixed.coeffs()(0) == doctest::Approx(1.0 / 8));
  CHECK(mixed.coeffs().tail(63).cwiseAbs().maxCoeff() < 1e-15);

  const auto ghz = pauli_expand(ghz3() * ghz3().adjoint());
  const std::vector<int> zz1{3, 3, 0};
  CHECK(std::abs(ghz.at(zz1) - 1.0 / 8) < 1e-14);
  const ComplexMatrix zz1_op = tensor(tensor(pauli(3), pauli(3)), pauli(0));
  CHECK(std::abs((ghz3() * ghz3().adjoint() * zz1_op).trace().real() / 8 - ghz.at(zz1)) < 1e-14);

  CHECK_THROWS_AS(pauli_expand(gaussian_matrix(4, 4, 1)), InputError);

  for (int n = 1; n <= 4; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ComplexMatrix h = random_hermitian(1 << n, seed + 17 * n);
      CHECK(max_abs(pauli_assemble(pauli_expand(h)) - h) < 1e-12);
      const auto rho = sample_density(n, 1 << n, seed);
      CHECK(pauli_expand(rho.matrix()).coeffs()(0) == doctest::Approx(std::pow(0.5, n)).epsilon(1e-14));
    }
  }
}

TEST_CASE("pauli strings are tensor products") {
  for (std::size_t s = 0; s < 64; ++s) {
    const ComplexMatrix expected = tensor(tensor(pauli(static_cast<int>(s / 16)), pauli(static_cast<int>(s / 4 % 4))),
                                          pauli(static_cast<int>(s % 4)));
    CHECK(max_abs(pauli_string(3, s) - expected) == 0.0);
  }
  const PauliCoefficients c(3, Eigen::VectorXd::Zero(64));
  CHECK(c.support(c.index_of(std::vector<int>{0, 2, 1})) == SubsetMask::of({2, 3}));
  CHECK(c.digit(c.index_of(std::vector<int>{3, 0, 1}), 1) == 3);
}

TEST_CASE("reduced coefficients are twice the full ones") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rho = sample_density(3, 8, seed);
    const auto full = pauli_expand(rho.matrix());
    const auto r12 = pauli_expand(partial_trace(rho.matrix(), SubsetMask::of({1, 2})));
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const std::vector<int> d2{i, j};
        const std::vector<int> d3{i, j, 0};
        CHECK(std::abs(r12.at(d2) - 2.0 * full.at(d3)) < 1e-12);
      }
    }
  }
}

TEST_CASE("hermitian_eigen") {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = -1;
  auto e = hermitian_eigen(d);
  CHECK(e.values(0) == doctest::Approx(-1));
  CHECK(e.values(1) == doctest::Approx(1));

  e = hermitian_eigen(pauli(1));
  CHECK(e.values(0) == doctest::Approx(-1));
  CHECK(e.values(1) == doctest::Approx(1));
  ComplexVector minus(2), plus(2);
  minus << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  CHECK(std::norm(inner(minus, e.vectors.col(0))) == doctest::Approx(1.0));
  CHECK(std::norm(inner(plus, e.vectors.col(1))) == doctest::Approx(1.0));

  CHECK_THROWS_AS(hermitian_eigen(gaussian_matrix(3, 3, 2)), InputError);
}

TEST_CASE("hermitian_eigen residual, orthonormality and trace") {
  for (int dim : {1, 2, 3, 4, 7, 8, 16, 32}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ComplexMatrix h = random_hermitian(dim, seed * 31 + dim);
      const auto e = hermitian_eigen(h);
      const ComplexMatrix rebuilt = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
      CHECK(max_abs(h - rebuilt) < kEigenResidual);
      CHECK(max_abs(e.vectors.adjoint() * e.vectors - ComplexMatrix::Identity(dim, dim)) < 1e-10);
      CHECK(std::abs(e.values.sum() - h.trace().real()) < 1e-10);
      for (Eigen::Index i = 1; i < dim; ++i) CHECK(e.values(i - 1) <= e.values(i));
      CHECK((e.values - oracle::eigenvalues(h)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("hermitian_eigen on degenerate spectra") {
  const ComplexMatrix i8 = ComplexMatrix::Identity(8, 8);
  CHECK(hermitian_eigen(i8).sweeps == 0);
  const auto c = counterexample_n4();
  const auto e = hermitian_eigen(c.delta1);
  CHECK(e.values(0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK((e.values - oracle::eigenvalues(c.delta1)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("universal_not") {
  const std::vector<int> zeros{0, 0, 0}, ones{1, 1, 1};
  const auto s000 = StateVector::basis(zeros).amplitudes();
  const auto s111 = StateVector::basis(ones).amplitudes();
  CHECK(max_abs(universal_not(StateVector(s000)).amplitudes() - s111) == 0.0);
  CHECK(max_abs(universal_not(StateVector(s111)).amplitudes() + s000) == 0.0);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const StateVector psi(gaussian_unit_vector(8, seed));
    const StateVector phi(gaussian_unit_vector(8, seed + 1000));
    const auto tpsi = universal_not(psi).amplitudes();
    const auto tphi = universal_not(phi).amplitudes();
    CHECK(max_abs(universal_not(universal_not(psi)).amplitudes() + psi.amplitudes()) < 1e-12);
    CHECK(std::abs(inner(tpsi, psi.amplitudes())) < 1e-12);
    CHECK(std::abs(inner(tphi, tpsi) - std::conj(inner(phi.amplitudes(), psi.amplitudes()))) < 1e-12);
  }
  CHECK_THROWS_AS(universal_not(StateVector(gaussian_unit_vector(4, 1))), InputError);
}

TEST_CASE("conjugate_by_tau") {
  const auto mixed = DensityMatrix::maximally_mixed(3);
  CHECK(max_abs(conjugate_by_tau(mixed) - mixed.matrix()) < 1e-15);

  const double a3 = 0.05;
  const ComplexMatrix z1 = tensor(tensor(pauli(3), pauli(0)), pauli(0));
  const ComplexMatrix rho = mixed.matrix() + a3 * z1;
  CHECK(max_abs(conjugate_by_tau(rho) - (mixed.matrix() - a3 * z1)) < 1e-15);

  // Against the antilinear action on an eigen-decomposition:
  // tau^-1 rho tau = sum_k p_k |tau^-1 v_k><tau^-1 v_k| with tau^-1 = -tau.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = sample_density(3, 4, seed);
    const auto e = hermitian_eigen(r.matrix());
    ComplexMatrix direct = ComplexMatrix::Zero(8, 8);
    for (int k = 0; k < 8; ++k) {
      const ComplexVector v = e.vectors.col(k);
      const ComplexVector tv = universal_not(StateVector(v)).amplitudes();
      direct += e.values(k) * tv * tv.adjoint();
    }
    CHECK(max_abs(conjugate_by_tau(r) - direct) < 1e-12);
  }
}

TEST_CASE("density matrix validation") {
  ComplexMatrix m = ComplexMatrix::Identity(4, 4) / 4.0;
  CHECK_NOTHROW(DensityMatrix{m});
  m(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix{m}, InputError);  // not Hermitian
  CHECK_THROWS_AS(DensityMatrix{ComplexMatrix(ComplexMatrix::Identity(4, 4) / 2.0)}, InputError);
  ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix{neg}, InputError);
  CHECK_THROWS_AS(DensityMatrix{ComplexMatrix(ComplexMatrix::Identity(3, 3) / 3.0)}, InputError);
}
