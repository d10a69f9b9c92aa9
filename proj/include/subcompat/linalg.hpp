#pragma once

// Dense complex linear algebra for multi-qubit operators.
//
// Index convention: in a k-qubit computational-basis index, qubit 1 is the
// most significant bit and qubit k the least significant, matching the
// left-to-right order of tensor products. Subsets of qubits use SubsetMask
// (qubit i in bit i - 1).

#include <complex>
#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "subcompat/errors.hpp"
#include "subcompat/subset.hpp"

namespace subcompat {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kTolHermitian = 1e-12;
inline constexpr double kTolTrace = 1e-12;
inline constexpr double kTolPsd = 1e-9;
inline constexpr double kEigenResidual = 1e-10;
inline constexpr Eigen::Index kMaxDimension = 4096;

/// log2 of a power-of-two dimension; throws InputError otherwise.
int qubit_count(Eigen::Index dim);

/// Largest |M - M^dagger| entry.
template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) throw InputError("matrix is not square");
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Kronecker product a (x) b.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> tensor(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  static_assert(std::is_same_v<typename DerivedA::Scalar, typename DerivedB::Scalar>,
                "tensor factors must share a scalar type");
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > kMaxDimension || cols > kMaxDimension) {
    throw ResourceError("tensor product dimension exceeds " + std::to_string(kMaxDimension));
  }
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Bit position of qubit `q` (1-based) inside a k-qubit index.
constexpr int qubit_bit(int q, int k) { return k - q; }

/// Mask over basis-index bits that corresponds to the qubits in `s`.
constexpr std::uint32_t index_mask(SubsetMask s, int k) {
  std::uint32_t mask = 0;
  for (int q = 1; q <= k; ++q) {
    if (s.contains(q)) mask |= 1u << qubit_bit(q, k);
  }
  return mask;
}

/// Traces out every qubit not in `keep`; kept qubits retain their order.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> partial_trace(
    const Eigen::MatrixBase<Derived>& m, SubsetMask keep) {
  const int k = qubit_count(m.rows());
  if (m.rows() != m.cols()) throw InputError("partial trace needs a square matrix");
  if (keep.empty()) throw InputError("partial trace must keep at least one qubit");
  if (!keep.within(k)) throw InputError("kept qubits " + keep.to_string() + " exceed the system size");
  const std::uint32_t kept = index_mask(keep, k);
  const std::uint32_t traced = index_mask(SubsetMask::full(k) - keep, k);
  const Eigen::Index dim_keep = Eigen::Index{1} << keep.size();
  const std::uint32_t dim_traced = 1u << (k - keep.size());
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(dim_keep, dim_keep);
  for (Eigen::Index r = 0; r < dim_keep; ++r) {
    const std::uint32_t rk = scatter_bits(static_cast<std::uint32_t>(r), kept);
    for (Eigen::Index c = 0; c < dim_keep; ++c) {
      const std::uint32_t ck = scatter_bits(static_cast<std::uint32_t>(c), kept);
      typename Derived::Scalar sum(0);
      for (std::uint32_t t = 0; t < dim_traced; ++t) {
        const std::uint32_t tb = scatter_bits(t, traced);
        sum += m(rk | tb, ck | tb);
      }
      out(r, c) = sum;
    }
  }
  return out;
}

/// The n-qubit operator acting as `op` on the qubits in `positions` (in
/// ascending order) and as the identity on the others.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> embed(
    const Eigen::MatrixBase<Derived>& op, SubsetMask positions, int n) {
  if (op.rows() != op.cols()) throw InputError("embedded operator must be square");
  const int k = qubit_count(op.rows());
  if (k != positions.size()) throw InputError("operator size does not match " + positions.to_string());
  if (n < 1 || !positions.within(n)) throw InputError("positions " + positions.to_string() + " exceed n");
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (dim > kMaxDimension) throw ResourceError("embedded dimension exceeds " + std::to_string(kMaxDimension));
  const std::uint32_t on = index_mask(positions, n);
  const std::uint32_t off = index_mask(SubsetMask::full(n) - positions, n);
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto rb = static_cast<std::uint32_t>(r);
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto cb = static_cast<std::uint32_t>(c);
      if ((rb & off) != (cb & off)) continue;
      out(r, c) = op(gather_bits(rb, on), gather_bits(cb, on));
    }
  }
  return out;
}

/// Pure state on k qubits.
class StateVector {
 public:
  explicit StateVector(ComplexVector amplitudes);
  /// Computational basis state |bits>, bits[0] being qubit 1.
  static StateVector basis(std::span<const int> bits);

  int qubits() const { return qubits_; }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  bool is_normalized(double tol = 1e-12) const;

 private:
  int qubits_;
  ComplexVector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite operator on 2^k dimensions.
class DensityMatrix {
 public:
  /// Throws InputError when any invariant fails its tolerance.
  explicit DensityMatrix(ComplexMatrix m);
  static DensityMatrix maximally_mixed(int qubits);
  static DensityMatrix pure(const StateVector& psi);

  int qubits() const { return qubits_; }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  int qubits_;
  ComplexMatrix matrix_;
};

DensityMatrix partial_trace(const DensityMatrix& rho, SubsetMask keep);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Single-qubit Pauli matrix: 0 = I, 1 = X, 2 = Y, 3 = Z.
ComplexMatrix pauli(int which);

/// Real coefficients of a Hermitian operator in the Pauli-string basis:
/// M = sum_S coeff(S) S with coeff(S) = tr(M S) / 2^n. A string is stored at
/// the base-4 index whose most significant digit belongs to qubit 1.
class PauliCoefficients {
 public:
  PauliCoefficients(int n, Eigen::VectorXd coeffs);

  int qubits() const { return n_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  /// Index of the string whose digit for qubit i is digits[i - 1].
  std::size_t index_of(std::span<const int> digits) const;
  double at(std::span<const int> digits) const { return coeffs_(static_cast<Eigen::Index>(index_of(digits))); }
  /// Digit (0..3) of qubit q in string `index`.
  int digit(std::size_t index, int q) const;
  /// Qubits carrying a non-identity factor.
  SubsetMask support(std::size_t index) const;

 private:
  int n_;
  Eigen::VectorXd coeffs_;
};

/// Throws InputError for non-Hermitian input.
PauliCoefficients pauli_expand(const ComplexMatrix& m);
ComplexMatrix pauli_assemble(const PauliCoefficients& c);
/// The string operator itself (a tensor product of Pauli matrices).
ComplexMatrix pauli_string(int n, std::size_t index);

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  ComplexMatrix vectors;   // columns, orthonormal
  int sweeps = 0;
};

/// Cyclic complex Jacobi rotations until the off-diagonal Frobenius mass is
/// below 1e-14 (relative to max(1, |M|_F)). Throws NumericError after 100
/// sweeps and InputError for non-Hermitian input.
HermitianEigen hermitian_eigen(const ComplexMatrix& m);

/// Antiunitary universal NOT on three qubits:
/// sum c_abc |abc> -> sum (-1)^(a+b+c) conj(c_abc) |not a, not b, not c>.
StateVector universal_not(const StateVector& psi);

/// tau^-1 M tau for a Hermitian 3-qubit operator, via the sign flip of every
/// odd-weight Pauli coefficient.
ComplexMatrix conjugate_by_tau(const ComplexMatrix& m);
ComplexMatrix conjugate_by_tau(const DensityMatrix& rho);

}  // namespace subcompat
