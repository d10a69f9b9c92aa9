#pragma once

// Compatibility of qubit reduced states: the three-qubit Bell-Wigner
// operator, its n-qubit odd-subset generalisations, the four-qubit
// counterexample, Ginibre sampling and a one-sided reconstruction probe.

#include <cstdint>
#include <map>
#include <optional>

#include "subcompat/linalg.hpp"

namespace subcompat {

inline constexpr double kTolEquimarginal = 1e-9;
inline constexpr double kTolProbe = 1e-7;

/// Two-qubit reductions of a three-qubit system on {1,2}, {1,3}, {2,3}.
struct ReducedFamily3 {
  DensityMatrix rho12;
  DensityMatrix rho13;
  DensityMatrix rho23;

  static ReducedFamily3 from_state(const DensityMatrix& rho);
};

struct QuantumEquimarginalReport {
  bool equimarginal = true;
  double max_deviation = 0.0;
};

/// Compares the single-qubit reductions shared by each pair of inputs.
QuantumEquimarginalReport check_q_equimarginal(const ReducedFamily3& family, double tol = kTolEquimarginal);

class QuantumNotEquimarginalError : public InputError {
 public:
  explicit QuantumNotEquimarginalError(double deviation);
  double deviation() const { return deviation_; }

 private:
  double deviation_;
};

/// 1 - rho_1 - rho_2 - rho_3 + rho_12 + rho_13 + rho_23, every term embedded
/// into three qubits. Throws QuantumNotEquimarginalError.
ComplexMatrix delta_operator(const ReducedFamily3& family);

struct QuantumVerdict {
  bool passes = true;
  double min_eig = 0.0;
  double max_eig = 0.0;
  std::optional<StateVector> witness_vector;
  double witness_expectation = 0.0;
};

/// 0 <= Delta <= 1 up to kTolPsd; the witness is the extremal eigenvector.
QuantumVerdict check_bell_wigner(const ReducedFamily3& family);

/// Reduced states keyed by qubit subset.
using QuantumFamily = std::map<SubsetMask, DensityMatrix>;

/// Reductions of `rho` on every nonempty proper subset of its qubits.
QuantumFamily all_reductions(const DensityMatrix& rho);

struct DeltaSpectrum {
  ComplexMatrix delta;
  double min_eig = 0.0;
  double max_eig = 0.0;
};

/// sum over B with A u B = N, B proper, of (-1)^{|A n B|} rho_B (identity for
/// B empty). Missing rho_B are derived from a stored superset. No verdict is
/// attached; for n > 3 these bounds are not necessary conditions.
DeltaSpectrum gen_delta(const QuantumFamily& family, SubsetMask a, int n);

struct Counterexample {
  StateVector psi;
  ComplexMatrix delta1;
  double min_eig = 0.0;
  ComplexVector eigenvector;
  double overlap = 0.0;  // |<target|eigenvector>|^2
  double closed_form_residual = 0.0;
};

/// |Psi> = (|0000> + |1100>)/sqrt(2) and Delta_1 = gen_delta(A = {2,3,4}),
/// which has eigenvalue -1/2 on (|0011> + |1111>)/sqrt(2). Throws
/// NumericError if any of the expected properties fails.
Counterexample counterexample_n4();

/// G G^dagger / tr(G G^dagger) for a 2^n x rank complex Gaussian G drawn from
/// CounterRng(seed).
DensityMatrix sample_density(int n_qubits, int rank, std::uint64_t seed);

enum class ProbeStatus { reconstructed, undetermined };

struct ProbeOptions {
  int max_iter = 5000;
  double tol = kTolProbe;
  /// 0 starts from the affine point with vanishing three-body terms; other
  /// values add a small seeded three-body perturbation.
  std::uint64_t seed = 0;
};

struct ProbeReport {
  ProbeStatus status = ProbeStatus::undetermined;
  int iterations = 0;
  double residual = 0.0;
  std::optional<DensityMatrix> candidate;
};

/// Thrown when the probe's hypothesis (Bell-Wigner passes) fails.
class HypothesisError : public InputError {
 public:
  explicit HypothesisError(QuantumVerdict verdict);
  const QuantumVerdict& verdict() const { return verdict_; }

 private:
  QuantumVerdict verdict_;
};

/// Dykstra alternating projections between the states with the given
/// two-qubit reductions (a coordinate slice in the Pauli basis) and the PSD
/// cone. Never reports incompatibility: failure to converge is undetermined.
ProbeReport probe_sufficiency(const ReducedFamily3& family, const ProbeOptions& options = {});

/// Largest entrywise deviation between the two-qubit reductions of `rho` and
/// the family.
double reduction_mismatch(const ComplexMatrix& rho, const ReducedFamily3& family);

}  // namespace subcompat
