#pragma once

// Exact-rational marginal problem for n binary variables.
//
// Conventions: variable i (1-based) occupies bit (i - 1) of both SubsetMask
// and Outcome bit patterns. A MarginalTable over subset A stores its values
// by "restriction index": bit k of the index is the value of the k-th
// smallest member of A. Every table is also viewed as a function on all n
// variables that is constant outside its subset.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "subcompat/errors.hpp"
#include "subcompat/subset.hpp"

namespace subcompat {

using Rational = mpq_class;

/// Largest n accepted by the classical routines (tables hold 2^n entries).
inline constexpr int kMaxClassicalVariables = 20;

/// Parses "p/q" or "p" with 0 <= p, q > 0; throws InputError otherwise.
/// Probabilities additionally need p <= q; see parse_probability.
Rational parse_rational(const std::string& text);
Rational parse_probability(const std::string& text);
/// Canonical "p/q" ("p" when q == 1).
std::string to_string(const Rational& value);

/// An assignment x = (x_1, ..., x_n) of all n binary variables.
class Outcome {
 public:
  Outcome(int n, std::uint32_t bits);
  /// Parses "x_1 x_2 ... x_n" written without separators, e.g. "101".
  static Outcome from_string(const std::string& bits);
  static Outcome zeros(int n) { return Outcome(n, 0); }

  int n() const { return n_; }
  std::uint32_t bits() const { return bits_; }
  /// Value of x_i, 1-based.
  int operator[](int i) const;
  std::string to_string() const;

  friend bool operator==(const Outcome&, const Outcome&) = default;

 private:
  int n_;
  std::uint32_t bits_;
};

/// prod_{i in A} (-1)^{x_i}; +1 for the empty set.
int sigma_eval(SubsetMask a, const Outcome& x);

/// Flips x_i for every i in A. An involution.
Outcome flip(SubsetMask a, const Outcome& x);

/// Probability table on the 2^|A| restrictions of an outcome to subset A.
class MarginalTable {
 public:
  /// Validates nonnegativity and exact unit sum; throws InputError.
  MarginalTable(int n, SubsetMask subset, std::vector<Rational> values);

  int n() const { return n_; }
  SubsetMask subset() const { return subset_; }
  std::span<const Rational> values() const { return values_; }

  const Rational& at_restriction(std::uint32_t restriction) const {
    return values_.at(restriction);
  }
  /// Evaluation at a full outcome; ignores bits outside the subset.
  const Rational& operator()(const Outcome& x) const;

  /// Restriction index of the full bit pattern `bits`.
  std::uint32_t restriction_of(std::uint32_t bits) const {
    return gather_bits(bits, subset_.bits());
  }
  /// Bitstring key of a restriction, characters ordered by ascending member.
  std::string restriction_key(std::uint32_t restriction) const;

  friend bool operator==(const MarginalTable&, const MarginalTable&) = default;

 private:
  int n_;
  SubsetMask subset_;
  std::vector<Rational> values_;
};

/// A probability distribution on all 2^n outcomes, indexed by Outcome::bits.
class JointTable {
 public:
  JointTable(int n, std::vector<Rational> values);
  static JointTable uniform(int n);

  int n() const { return n_; }
  std::span<const Rational> values() const { return values_; }
  const Rational& operator()(const Outcome& x) const { return values_.at(x.bits()); }

  friend bool operator==(const JointTable&, const JointTable&) = default;

 private:
  int n_;
  std::vector<Rational> values_;
};

/// P_A = sum over the variables outside A of P. A must be a proper subset.
MarginalTable marginalize(const JointTable& joint, SubsetMask a);
/// Sub-marginal of a table onto A, A contained in the table's subset.
MarginalTable marginalize(const MarginalTable& table, SubsetMask a);

/// Indexed collection of subset marginals of n binary variables.
class MarginalFamily {
 public:
  explicit MarginalFamily(int n);

  /// Marginals of `joint` on each of the given subsets.
  static MarginalFamily from_joint(const JointTable& joint, std::span<const SubsetMask> subsets);
  /// Marginals of `joint` on the n maximal proper subsets.
  static MarginalFamily maximal_from_joint(const JointTable& joint);

  /// Throws InputError for the full set, a mismatched n or a duplicate.
  void add(MarginalTable table);

  int n() const { return n_; }
  const std::map<SubsetMask, MarginalTable>& tables() const { return tables_; }
  bool contains(SubsetMask a) const { return tables_.contains(a); }
  const MarginalTable& table(SubsetMask a) const;

  /// P_B derived from the first stored superset of B (by mask order); the
  /// empty set yields the constant 1. Empty when no stored table covers B.
  std::optional<MarginalTable> derive(SubsetMask b) const;
  /// Every proper subset of {1..n} is covered by some stored table.
  bool covers_all_proper_subsets() const;
  /// Stores exactly {1,2}, {1,3}, {2,3} with n = 3.
  bool is_pairwise_triple() const;

 private:
  int n_;
  std::map<SubsetMask, MarginalTable> tables_;
};

struct EquimarginalWitness {
  SubsetMask first;
  SubsetMask second;
  SubsetMask common;
};

struct EquimarginalReport {
  bool equimarginal = true;
  std::optional<EquimarginalWitness> witness;
};

/// Exact pairwise agreement of the stored tables on their common variables.
EquimarginalReport check_equimarginal(const MarginalFamily& family);

/// Thrown when an operation requiring an equimarginal family receives one
/// that is not.
class NotEquimarginalError : public InputError {
 public:
  explicit NotEquimarginalError(EquimarginalWitness w);
  const EquimarginalWitness& witness() const { return witness_; }

 private:
  EquimarginalWitness witness_;
};

/// Coefficients c_A of P = sum_A c_A sigma_A; c_{} = 2^{-n}.
struct SigmaCoefficients {
  int n = 0;
  std::map<SubsetMask, Rational> coeffs;

  const Rational& at(SubsetMask a) const { return coeffs.at(a); }
};

/// c_B for every subset B of a stored subset, by inclusion-exclusion over
/// the derived marginals. Throws NotEquimarginalError.
SigmaCoefficients coefficients_from_family(const MarginalFamily& family);

/// P_A(x) = 2^{n-|A|} sum_{B subset of A} c_B sigma_B(x). Every subset of A
/// must be present in `coeffs`.
Rational marginal_from_coefficients(const SigmaCoefficients& coeffs, SubsetMask a, const Outcome& x);

/// A failed inequality: which family (`inequality`), the subset and outcome
/// it was instantiated at, and the value of the bounded expression.
struct InequalityWitness {
  std::string inequality;
  SubsetMask subset;
  Outcome x;
  Rational value;
};

struct ClassicalVerdict {
  bool compatible = true;
  std::optional<InequalityWitness> witness;
  std::optional<JointTable> certificate;
};

/// Slack P_ac(x_a, x_c) + P_bc(x_b, not x_c) - P_ab(x_a, x_b) of one Wigner
/// inequality; c is the third index. Nonnegative when the inequality holds.
Rational wigner_slack(const MarginalFamily& family, int a, int b, const Outcome& x);

/// All Wigner inequalities over the six orderings of (1,2,3). The witness
/// subset is {a, b} and its value the (negative) slack.
ClassicalVerdict check_wigner(const MarginalFamily& family);

/// 1 - P_1 - P_2 - P_3 + P_12 + P_13 + P_23 at x, for a pairwise triple.
Rational delta3(const MarginalFamily& family, const Outcome& x);

/// sum_{B : A u B = N, B proper} (-1)^{|A n B|} P_B(x), with P_{} = 1.
Rational odd_subset_sum(const MarginalFamily& family, SubsetMask a, const Outcome& x);

/// 0 <= odd_subset_sum <= 1 for every odd A and every x.
ClassicalVerdict check_theorem2(const MarginalFamily& family);

/// Q(x) = sum_{B proper} (-1)^{n-|B|-1} 2^{-(n-|B|)} P_B(x).
Rational q_function(const MarginalFamily& family, const Outcome& x);
/// Q at every outcome, indexed by Outcome::bits.
std::vector<Rational> q_table(const MarginalFamily& family);

/// Bounds on Q and on Q(x) + Q(flip(A, x)) for every odd A.
ClassicalVerdict check_theorem3(const MarginalFamily& family);

/// Feasible interval for the top coefficient c_N and the chosen value.
struct TopCoefficientInterval {
  Rational lower;
  Rational upper;
  Rational chosen;
};

struct Reconstruction {
  ClassicalVerdict verdict;  // certificate holds the joint when compatible
  std::optional<TopCoefficientInterval> interval;
};

/// Builds P = Q + c_N sigma_N with c_N at the midpoint of its feasible
/// interval. Refuses (compatible = false, witness set) when the odd-subset
/// conditions fail.
Reconstruction reconstruct_joint(const MarginalFamily& family);

}  // namespace subcompat
