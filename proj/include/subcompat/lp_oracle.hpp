#pragma once

// Exact linear-programming feasibility oracle for the marginal problem: is
// there a nonnegative joint P on {0,1}^n whose marginals equal the stored
// tables? Makes no use of the odd-subset theorems.

#include <cstddef>
#include <optional>
#include <vector>

#include "subcompat/classical.hpp"

namespace subcompat {

inline constexpr int kDefaultOracleCap = 6;

struct EqualityRow {
  std::vector<Rational> coeffs;
  Rational rhs;
};

/// Equalities over the 2^n joint probabilities (indexed by Outcome::bits);
/// every variable is implicitly nonnegative.
struct FeasibilitySystem {
  int n = 0;
  std::size_t num_vars = 0;
  std::vector<EqualityRow> equalities;
};

struct OracleVerdict {
  bool feasible = false;
  std::optional<JointTable> solution;
};

/// One row per (stored subset, restriction) plus the total-probability row.
/// Throws ResourceError when n exceeds `max_n`.
FeasibilitySystem build_system(const MarginalFamily& family, int max_n = kDefaultOracleCap);

/// Exact phase-one simplex with Bland's rule after eliminating redundant
/// rows. Returns a vertex solution when feasible.
OracleVerdict solve_feasibility(const FeasibilitySystem& system);

inline OracleVerdict oracle_verdict(const MarginalFamily& family) { return solve_feasibility(build_system(family)); }

}  // namespace subcompat
