#include "subcompat/quantum_compat.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "subcompat/random.hpp"

namespace subcompat {
namespace {

const SubsetMask k12 = SubsetMask(0b011);
const SubsetMask k13 = SubsetMask(0b101);
const SubsetMask k23 = SubsetMask(0b110);

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Keep-mask for `b` expressed in the local qubit numbering of `s` (b within s).
SubsetMask relative_mask(SubsetMask b, SubsetMask s) {
  return SubsetMask(gather_bits(b.bits(), s.bits()));
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) / 2.0; }

ComplexMatrix project_psd(const ComplexMatrix& m) {
  const auto eig = hermitian_eigen(hermitian_part(m));
  const Eigen::VectorXd clipped = eig.values.cwiseMax(0.0);
  return hermitian_part(eig.vectors * clipped.asDiagonal() * eig.vectors.adjoint());
}

// Pauli coefficients of the three-qubit state fixed by the two-qubit
// reductions; `fixed[s]` marks every string of weight at most two.
struct AffineSlice {
  Eigen::VectorXd target;
  std::array<bool, 64> fixed{};
};

AffineSlice affine_slice(const ReducedFamily3& family) {
  const auto c12 = pauli_expand(family.rho12.matrix());
  const auto c13 = pauli_expand(family.rho13.matrix());
  const auto c23 = pauli_expand(family.rho23.matrix());
  AffineSlice slice;
  slice.target = Eigen::VectorXd::Zero(64);
  const PauliCoefficients layout(3, Eigen::VectorXd::Zero(64));
  for (std::size_t s = 0; s < 64; ++s) {
    const int d1 = layout.digit(s, 1), d2 = layout.digit(s, 2), d3 = layout.digit(s, 3);
    const auto support = layout.support(s);
    if (support.size() == 3) continue;
    slice.fixed[s] = true;
    // A reduction's coefficient is twice the matching three-qubit one.
    double sum = 0.0;
    int sources = 0;
    if (support.is_subset_of(k12)) {
      sum += c12.coeffs()(4 * d1 + d2) / 2.0;
      ++sources;
    }
    if (support.is_subset_of(k13)) {
      sum += c13.coeffs()(4 * d1 + d3) / 2.0;
      ++sources;
    }
    if (support.is_subset_of(k23)) {
      sum += c23.coeffs()(4 * d2 + d3) / 2.0;
      ++sources;
    }
    slice.target(static_cast<Eigen::Index>(s)) = sum / sources;
  }
  return slice;
}

ComplexMatrix project_affine(const ComplexMatrix& m, const AffineSlice& slice) {
  auto coeffs = pauli_expand(hermitian_part(m));
  for (std::size_t s = 0; s < 64; ++s) {
    if (slice.fixed[s]) coeffs.coeffs()(static_cast<Eigen::Index>(s)) = slice.target(static_cast<Eigen::Index>(s));
  }
  return pauli_assemble(coeffs);
}

void check_family_equimarginal(const QuantumFamily& family) {
  double worst = 0.0;
  for (auto i = family.begin(); i != family.end(); ++i) {
    for (auto j = std::next(i); j != family.end(); ++j) {
      const auto common = i->first & j->first;
      if (common.empty()) continue;
      const auto a = partial_trace(i->second.matrix(), relative_mask(common, i->first));
      const auto b = partial_trace(j->second.matrix(), relative_mask(common, j->first));
      worst = std::max(worst, max_abs_diff(a, b));
    }
  }
  if (worst > kTolEquimarginal) throw QuantumNotEquimarginalError(worst);
}

}  // namespace

ReducedFamily3 ReducedFamily3::from_state(const DensityMatrix& rho) {
  if (rho.qubits() != 3) throw InputError("expected a three-qubit state");
  return {partial_trace(rho, k12), partial_trace(rho, k13), partial_trace(rho, k23)};
}

QuantumEquimarginalReport check_q_equimarginal(const ReducedFamily3& family, double tol) {
  const SubsetMask first = SubsetMask::of({1});
  const SubsetMask second = SubsetMask::of({2});
  const ComplexMatrix& r12 = family.rho12.matrix();
  const ComplexMatrix& r13 = family.rho13.matrix();
  const ComplexMatrix& r23 = family.rho23.matrix();
  const double dev1 = max_abs_diff(partial_trace(r12, first), partial_trace(r13, first));
  const double dev2 = max_abs_diff(partial_trace(r12, second), partial_trace(r23, first));
  const double dev3 = max_abs_diff(partial_trace(r13, second), partial_trace(r23, second));
  QuantumEquimarginalReport report;
  report.max_deviation = std::max({dev1, dev2, dev3});
  report.equimarginal = report.max_deviation <= tol;
  return report;
}

QuantumNotEquimarginalError::QuantumNotEquimarginalError(double deviation)
    : InputError("reduced states are not equimarginal (max deviation " + std::to_string(deviation) + ")"),
      deviation_(deviation) {}

HypothesisError::HypothesisError(QuantumVerdict verdict)
    : InputError("Bell-Wigner conditions fail (Delta spectrum [" + std::to_string(verdict.min_eig) + ", " +
                 std::to_string(verdict.max_eig) + "]); the probe's hypothesis does not hold"),
      verdict_(std::move(verdict)) {}

ComplexMatrix delta_operator(const ReducedFamily3& family) {
  const auto report = check_q_equimarginal(family);
  if (!report.equimarginal) throw QuantumNotEquimarginalError(report.max_deviation);
  const ComplexMatrix& r12 = family.rho12.matrix();
  const ComplexMatrix& r13 = family.rho13.matrix();
  const ComplexMatrix& r23 = family.rho23.matrix();
  const ComplexMatrix rho1 = partial_trace(r12, SubsetMask::of({1}));
  const ComplexMatrix rho2 = partial_trace(r12, SubsetMask::of({2}));
  const ComplexMatrix rho3 = partial_trace(r13, SubsetMask::of({2}));
  ComplexMatrix delta = ComplexMatrix::Identity(8, 8);
  delta -= embed(rho1, SubsetMask::of({1}), 3);
  delta -= embed(rho2, SubsetMask::of({2}), 3);
  delta -= embed(rho3, SubsetMask::of({3}), 3);
  delta += embed(r12, k12, 3);
  delta += embed(r13, k13, 3);
  delta += embed(r23, k23, 3);
  return delta;
}

QuantumVerdict check_bell_wigner(const ReducedFamily3& family) {
  const ComplexMatrix delta = delta_operator(family);
  const auto eig = hermitian_eigen(delta);
  QuantumVerdict verdict;
  verdict.min_eig = eig.values(0);
  verdict.max_eig = eig.values(eig.values.size() - 1);
  const bool low = verdict.min_eig < -kTolPsd;
  const bool high = verdict.max_eig > 1.0 + kTolPsd;
  verdict.passes = !low && !high;
  if (!verdict.passes) {
    const ComplexVector w = low ? eig.vectors.col(0) : eig.vectors.col(eig.vectors.cols() - 1);
    verdict.witness_expectation = w.dot(delta * w).real();
    verdict.witness_vector = StateVector(w);
  }
  return verdict;
}

QuantumFamily all_reductions(const DensityMatrix& rho) {
  QuantumFamily family;
  const std::uint32_t full = SubsetMask::full(rho.qubits()).bits();
  for (std::uint32_t b = 1; b < full; ++b) family.emplace(SubsetMask(b), partial_trace(rho, SubsetMask(b)));
  return family;
}

DeltaSpectrum gen_delta(const QuantumFamily& family, SubsetMask a, int n) {
  if (n < 1 || !a.within(n)) throw InputError("subset " + a.to_string() + " not within 1.." + std::to_string(n));
  if (a.size() % 2 == 0) throw InputError("subset " + a.to_string() + " must have odd size");
  for (const auto& [subset, rho] : family) {
    if (!subset.within(n) || subset == SubsetMask::full(n) || subset.empty()) {
      throw InputError("family subset " + subset.to_string() + " is not a nonempty proper subset");
    }
    if (rho.qubits() != subset.size()) throw InputError("state on " + subset.to_string() + " has the wrong size");
  }
  check_family_equimarginal(family);

  const std::uint32_t full = SubsetMask::full(n).bits();
  const std::uint32_t rest = full & ~a.bits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  DeltaSpectrum out;
  out.delta = ComplexMatrix::Zero(dim, dim);
  std::uint32_t s = a.bits();
  while (true) {
    const SubsetMask b(rest | s);
    if (b.bits() != full) {
      const double sign = (std::popcount(s) % 2 == 0) ? 1.0 : -1.0;
      if (b.empty()) {
        out.delta += sign * ComplexMatrix::Identity(dim, dim);
      } else {
        std::optional<ComplexMatrix> rho_b;
        for (const auto& [subset, rho] : family) {
          if (b.is_subset_of(subset)) {
            rho_b = b == subset ? rho.matrix() : partial_trace(rho.matrix(), relative_mask(b, subset));
            break;
          }
        }
        if (!rho_b) throw InputError("family does not determine the state on " + b.to_string());
        out.delta += sign * embed(*rho_b, b, n);
      }
    }
    if (s == 0) break;
    s = (s - 1) & a.bits();
  }
  const auto eig = hermitian_eigen(out.delta);
  out.min_eig = eig.values(0);
  out.max_eig = eig.values(eig.values.size() - 1);
  return out;
}

Counterexample counterexample_n4() {
  ComplexVector amp = ComplexVector::Zero(16);
  const double h = 1.0 / std::sqrt(2.0);
  amp(0b0000) = h;
  amp(0b1100) = h;
  Counterexample out{StateVector(amp), {}, 0.0, {}, 0.0, 0.0};
  const auto family = all_reductions(DensityMatrix::pure(out.psi));
  const auto delta = gen_delta(family, SubsetMask::of({2, 3, 4}), 4);
  out.delta1 = delta.delta;

  ComplexVector bell = ComplexVector::Zero(4);
  bell(0b00) = h;
  bell(0b11) = h;
  const ComplexMatrix p_plus = bell * bell.adjoint();
  const ComplexMatrix p0 = (ComplexMatrix(2, 2) << 1, 0, 0, 0).finished();
  const ComplexMatrix p1 = (ComplexMatrix(2, 2) << 0, 0, 0, 1).finished();
  const ComplexMatrix id4 = ComplexMatrix::Identity(4, 4);
  const ComplexMatrix closed =
      0.5 * tensor(tensor(id4 - 2.0 * p_plus, p1), p1) + tensor(tensor(p_plus, p0), p0);
  out.closed_form_residual = max_abs_diff(out.delta1, closed);

  const auto eig = hermitian_eigen(out.delta1);
  out.min_eig = eig.values(0);
  out.eigenvector = eig.vectors.col(0);
  ComplexVector target = ComplexVector::Zero(16);
  target(0b0011) = h;
  target(0b1111) = h;
  out.overlap = std::norm(target.dot(out.eigenvector));

  if (std::abs(out.min_eig + 0.5) > 1e-9 || out.overlap < 1.0 - 1e-9 || out.closed_form_residual >= 1e-12) {
    throw NumericError("four-qubit counterexample did not reproduce its expected spectrum");
  }
  return out;
}

DensityMatrix sample_density(int n_qubits, int rank, std::uint64_t seed) {
  if (n_qubits < 1 || n_qubits > 6) throw InputError("sampling supports 1..6 qubits");
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (rank < 1 || rank > dim) throw InputError("rank must lie in [1, 2^n]");
  const ComplexMatrix g = gaussian_matrix(dim, rank, seed);
  ComplexMatrix m = g * g.adjoint();
  m = hermitian_part(m) / m.trace().real();
  return DensityMatrix(std::move(m));
}

double reduction_mismatch(const ComplexMatrix& rho, const ReducedFamily3& family) {
  return std::max({max_abs_diff(partial_trace(rho, k12), family.rho12.matrix()),
                   max_abs_diff(partial_trace(rho, k13), family.rho13.matrix()),
                   max_abs_diff(partial_trace(rho, k23), family.rho23.matrix())});
}

ProbeReport probe_sufficiency(const ReducedFamily3& family, const ProbeOptions& options) {
  auto verdict = check_bell_wigner(family);
  if (!verdict.passes) throw HypothesisError(std::move(verdict));

  const AffineSlice slice = affine_slice(family);
  PauliCoefficients start(3, slice.target);
  if (options.seed != 0) {
    CounterRng rng(options.seed);
    for (std::size_t s = 0; s < 64; ++s) {
      if (!slice.fixed[s]) start.coeffs()(static_cast<Eigen::Index>(s)) = 1e-3 * rng.normal();
    }
  }

  ComplexMatrix x = pauli_assemble(start);
  ComplexMatrix p = ComplexMatrix::Zero(8, 8);
  ComplexMatrix q = ComplexMatrix::Zero(8, 8);
  ProbeReport report;
  report.residual = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const ComplexMatrix y = project_psd(x + p);
    p = x + p - y;
    const ComplexMatrix next = project_affine(y + q, slice);
    q = y + q - next;
    x = next;

    report.iterations = iter;
    const double trace = y.trace().real();
    if (trace <= 0.0) continue;
    // y lies in the cone; after normalization only its reductions can be off.
    const ComplexMatrix candidate = y / trace;
    const double psd_violation = std::max(0.0, -hermitian_eigen(candidate).values(0));
    report.residual = std::max(psd_violation, reduction_mismatch(candidate, family));
    if (report.residual < options.tol) {
      report.status = ProbeStatus::reconstructed;
      report.candidate = DensityMatrix(candidate);
      return report;
    }
  }
  return report;
}

}  // namespace subcompat
