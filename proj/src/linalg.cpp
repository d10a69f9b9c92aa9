#include "subcompat/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace subcompat {
namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTarget = 1e-14;

double off_diagonal_norm(const ComplexMatrix& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) sum += std::norm(a(i, j));
    }
  }
  return std::sqrt(sum);
}

// Phase of single-qubit Pauli `d` at (row bit, row bit ^ flip).
Complex pauli_phase(int d, std::uint32_t row_bit) {
  switch (d) {
    case 2:
      return row_bit ? Complex(0, 1) : Complex(0, -1);
    case 3:
      return row_bit ? Complex(-1, 0) : Complex(1, 0);
    default:
      return Complex(1, 0);
  }
}

// For Pauli string `index` on n qubits: the basis-index bits it flips and the
// nonzero entry S(r, r ^ flip).
struct StringAction {
  std::uint32_t flip = 0;
  std::vector<int> digits;  // digits[q - 1]

  Complex phase(std::uint32_t r, int n) const {
    Complex p(1, 0);
    for (int q = 1; q <= n; ++q) {
      const int d = digits[q - 1];
      if (d >= 2) p *= pauli_phase(d, (r >> qubit_bit(q, n)) & 1u);
    }
    return p;
  }
};

StringAction string_action(int n, std::size_t index) {
  StringAction act;
  act.digits.resize(n);
  for (int q = n; q >= 1; --q) {
    const int d = static_cast<int>(index & 3u);
    index >>= 2;
    act.digits[q - 1] = d;
    if (d == 1 || d == 2) act.flip |= 1u << qubit_bit(q, n);
  }
  return act;
}

}  // namespace

int qubit_count(Eigen::Index dim) {
  if (dim < 1 || (dim & (dim - 1)) != 0) {
    throw InputError("dimension " + std::to_string(dim) + " is not a power of two");
  }
  if (dim > kMaxDimension) throw ResourceError("dimension exceeds " + std::to_string(kMaxDimension));
  return std::countr_zero(static_cast<std::uint64_t>(dim));
}

StateVector::StateVector(ComplexVector amplitudes)
    : qubits_(qubit_count(amplitudes.size())), amplitudes_(std::move(amplitudes)) {}

StateVector StateVector::basis(std::span<const int> bits) {
  const int k = static_cast<int>(bits.size());
  ComplexVector v = ComplexVector::Zero(Eigen::Index{1} << k);
  std::uint32_t index = 0;
  for (int q = 1; q <= k; ++q) {
    if (bits[q - 1] != 0 && bits[q - 1] != 1) throw InputError("basis bits must be 0 or 1");
    if (bits[q - 1]) index |= 1u << qubit_bit(q, k);
  }
  v(index) = 1.0;
  return StateVector(std::move(v));
}

bool StateVector::is_normalized(double tol) const { return std::abs(amplitudes_.squaredNorm() - 1.0) <= tol; }

DensityMatrix::DensityMatrix(ComplexMatrix m) : qubits_(0), matrix_(std::move(m)) {
  if (matrix_.rows() != matrix_.cols()) throw InputError("density matrix is not square");
  qubits_ = qubit_count(matrix_.rows());
  const double herm = hermiticity_defect(matrix_);
  if (herm > kTolHermitian) throw InputError("density matrix not Hermitian (defect " + std::to_string(herm) + ")");
  const double trace_error = std::abs(matrix_.trace() - Complex(1, 0));
  if (trace_error > kTolTrace) {
    throw InputError("density matrix trace differs from 1 by " + std::to_string(trace_error));
  }
  const double min_eig = hermitian_eigen(matrix_).values(0);
  if (min_eig < -kTolPsd) {
    throw InputError("density matrix has negative eigenvalue " + std::to_string(min_eig));
  }
}

DensityMatrix DensityMatrix::maximally_mixed(int qubits) {
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  if (!psi.is_normalized()) throw InputError("pure state is not normalized");
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix partial_trace(const DensityMatrix& rho, SubsetMask keep) {
  return DensityMatrix(partial_trace(rho.matrix(), keep));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(tensor(a.matrix(), b.matrix()));
}

ComplexMatrix pauli(int which) {
  ComplexMatrix p = ComplexMatrix::Zero(2, 2);
  switch (which) {
    case 0:
      p(0, 0) = p(1, 1) = 1.0;
      break;
    case 1:
      p(0, 1) = p(1, 0) = 1.0;
      break;
    case 2:
      p(0, 1) = Complex(0, -1);
      p(1, 0) = Complex(0, 1);
      break;
    case 3:
      p(0, 0) = 1.0;
      p(1, 1) = -1.0;
      break;
    default:
      throw InputError("Pauli index must be 0..3");
  }
  return p;
}

PauliCoefficients::PauliCoefficients(int n, Eigen::VectorXd coeffs) : n_(n), coeffs_(std::move(coeffs)) {
  if (n < 1 || n > 6) throw InputError("Pauli expansion supports 1..6 qubits");
  if (coeffs_.size() != (Eigen::Index{1} << (2 * n))) throw InputError("Pauli coefficient vector must have 4^n entries");
}

std::size_t PauliCoefficients::index_of(std::span<const int> digits) const {
  if (static_cast<int>(digits.size()) != n_) throw InputError("Pauli string length does not match");
  std::size_t index = 0;
  for (int d : digits) {
    if (d < 0 || d > 3) throw InputError("Pauli digit must be 0..3");
    index = index * 4 + static_cast<std::size_t>(d);
  }
  return index;
}

int PauliCoefficients::digit(std::size_t index, int q) const {
  return static_cast<int>((index >> (2 * (n_ - q))) & 3u);
}

SubsetMask PauliCoefficients::support(std::size_t index) const {
  std::uint32_t bits = 0;
  for (int q = 1; q <= n_; ++q) {
    if (digit(index, q) != 0) bits |= 1u << (q - 1);
  }
  return SubsetMask(bits);
}

PauliCoefficients pauli_expand(const ComplexMatrix& m) {
  const int n = qubit_count(m.rows());
  if (hermiticity_defect(m) > kTolHermitian) throw InputError("Pauli expansion needs a Hermitian matrix");
  const std::size_t strings = std::size_t{1} << (2 * n);
  const auto dim = static_cast<std::uint32_t>(m.rows());
  const double scale = 1.0 / static_cast<double>(dim);
  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(strings));
  for (std::size_t s = 0; s < strings; ++s) {
    const auto act = string_action(n, s);
    // tr(M S) = sum_c M(c ^ flip, c) S(c, c ^ flip)
    Complex trace(0, 0);
    for (std::uint32_t c = 0; c < dim; ++c) trace += m(c ^ act.flip, c) * act.phase(c, n);
    coeffs(static_cast<Eigen::Index>(s)) = trace.real() * scale;
  }
  return PauliCoefficients(n, std::move(coeffs));
}

ComplexMatrix pauli_string(int n, std::size_t index) {
  const auto act = string_action(n, index);
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexMatrix s = ComplexMatrix::Zero(dim, dim);
  for (std::uint32_t r = 0; r < static_cast<std::uint32_t>(dim); ++r) s(r, r ^ act.flip) = act.phase(r, n);
  return s;
}

ComplexMatrix pauli_assemble(const PauliCoefficients& c) {
  const int n = c.qubits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index s = 0; s < c.coeffs().size(); ++s) {
    const double v = c.coeffs()(s);
    if (v == 0.0) continue;
    const auto act = string_action(n, static_cast<std::size_t>(s));
    for (std::uint32_t r = 0; r < static_cast<std::uint32_t>(dim); ++r) m(r, r ^ act.flip) += v * act.phase(r, n);
  }
  return m;
}

HermitianEigen hermitian_eigen(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw InputError("eigendecomposition needs a square matrix");
  if (hermiticity_defect(m) > kTolHermitian) throw InputError("eigendecomposition needs a Hermitian matrix");
  const Eigen::Index dim = m.rows();
  ComplexMatrix a = (m + m.adjoint()) / 2.0;
  ComplexMatrix v = ComplexMatrix::Identity(dim, dim);
  const double target = kOffDiagonalTarget * std::max(1.0, a.norm());

  int sweep = 0;
  while (off_diagonal_norm(a) >= target) {
    if (sweep == kMaxSweeps) throw NumericError("Jacobi eigensolver did not converge in 100 sweeps");
    ++sweep;
    for (Eigen::Index p = 0; p < dim - 1; ++p) {
      for (Eigen::Index q = p + 1; q < dim; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag < 1e-300) continue;
        const Complex phase = a(p, q) / mag;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // U restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]].
        const Complex upp(c, 0), upq(s, 0);
        const Complex uqp = -s * std::conj(phase);
        const Complex uqq = c * std::conj(phase);
        for (Eigen::Index k = 0; k < dim; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
        for (Eigen::Index k = 0; k < dim; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = a(q, p) = Complex(0, 0);
        a(p, p) = Complex(a(p, p).real(), 0);
        a(q, q) = Complex(a(q, q).real(), 0);
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigen out;
  out.values.resize(dim);
  out.vectors.resize(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    out.values(i) = a(order[i], order[i]).real();
    out.vectors.col(i) = v.col(order[i]);
  }
  out.sweeps = sweep;
  return out;
}

StateVector universal_not(const StateVector& psi) {
  if (psi.qubits() != 3) throw InputError("universal NOT is defined here for three qubits");
  const auto& c = psi.amplitudes();
  ComplexVector out(8);
  for (std::uint32_t i = 0; i < 8; ++i) {
    const double sign = (std::popcount(i) % 2 == 0) ? 1.0 : -1.0;
    out(7 - i) = sign * std::conj(c(i));
  }
  return StateVector(std::move(out));
}

ComplexMatrix conjugate_by_tau(const ComplexMatrix& m) {
  if (m.rows() != 8 || m.cols() != 8) throw InputError("tau conjugation is defined here for three qubits");
  auto coeffs = pauli_expand(m);
  for (Eigen::Index s = 0; s < coeffs.coeffs().size(); ++s) {
    if (coeffs.support(static_cast<std::size_t>(s)).size() % 2 == 1) coeffs.coeffs()(s) = -coeffs.coeffs()(s);
  }
  return pauli_assemble(coeffs);
}

ComplexMatrix conjugate_by_tau(const DensityMatrix& rho) { return conjugate_by_tau(rho.matrix()); }

}  // namespace subcompat
