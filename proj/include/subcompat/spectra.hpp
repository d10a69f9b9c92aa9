#pragma once

// Inequality checks on one-party spectra: pure-state marginal conditions for
// qubits (polygon), three qutrits, 2x2x4 systems, the general pairwise
// necessary condition, and the fermionic bound on one-particle spectra.
//
// Every comparison "a <= b" is evaluated as a <= b + kSpectrumTolerance.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subcompat/errors.hpp"

namespace subcompat {

inline constexpr double kSpectrumTolerance = 1e-12;

/// Ascending eigenvalues in [0, 1].
class Spectrum {
 public:
  /// Validates order and range; with `full`, also a unit sum. Throws
  /// InputError.
  explicit Spectrum(std::vector<double> values, bool full = true);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  /// Sum of the p smallest eigenvalues.
  double partial_sum(std::size_t p) const;

 private:
  std::vector<double> values_;
};

struct CriterionVerdict {
  bool compatible = true;
  std::optional<std::string> failed_inequality;
};

/// Verdict of a condition that is only known to be necessary: failure proves
/// incompatibility, passing proves nothing.
struct NecessityVerdict {
  bool consistent_with_necessity = true;
  std::optional<std::string> failed_inequality;
};

/// lambda_i <= sum_{j != i} lambda_j on the smaller eigenvalues of qubit
/// reductions. Throws InputError for values outside [0, 1/2].
CriterionVerdict check_polygon(std::span<const double> smaller_eigenvalues);

/// Pure three-qutrit criterion over every ordering of the three parties.
CriterionVerdict check_higuchi(const Spectrum& s1, const Spectrum& s2, const Spectrum& s3);

/// Pure states on C^2 (x) C^2 (x) C^4 from the two qubit smaller eigenvalues
/// and the four-level spectrum.
CriterionVerdict check_bravyi(double l1, double l2, const Spectrum& s3);

/// Pairwise partial-sum condition for n particles of dimension m.
NecessityVerdict check_hzg(std::span<const Spectrum> spectra, std::size_t m);

/// One-particle spectrum of n fermions: every eigenvalue in [0, 1/n].
CriterionVerdict check_coleman(const Spectrum& spectrum, int n_fermions);

}  // namespace subcompat
