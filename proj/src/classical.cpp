#include "subcompat/classical.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <utility>

namespace subcompat {
namespace {

Rational pow2(int e) {
  Rational r(1);
  if (e >= 0) {
    mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
  } else {
    mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
  }
  return r;
}

void check_n(int n) {
  if (n < 1 || n > kMaxClassicalVariables) {
    throw InputError("number of variables " + std::to_string(n) + " outside [1, " +
                     std::to_string(kMaxClassicalVariables) + "]");
  }
}

int parity_sign(std::uint32_t bits) { return (std::popcount(bits) & 1) ? -1 : 1; }

// Every derivable P_B expanded to a function of all n variables. Indexed by
// mask value, then by full outcome bits.
class ExpandedMarginals {
 public:
  explicit ExpandedMarginals(const MarginalFamily& family) : n_(family.n()) {
    const std::uint32_t outcomes = 1u << n_;
    const std::uint32_t full = SubsetMask::full(n_).bits();
    tables_.resize(full);
    for (std::uint32_t b = 0; b < full; ++b) {
      auto table = family.derive(SubsetMask(b));
      if (!table) {
        throw InputError("family does not determine the marginal on " + SubsetMask(b).to_string());
      }
      auto& row = tables_[b];
      row.reserve(outcomes);
      for (std::uint32_t x = 0; x < outcomes; ++x) {
        row.push_back(table->at_restriction(table->restriction_of(x)));
      }
    }
  }

  const Rational& at(std::uint32_t b, std::uint32_t x) const { return tables_[b][x]; }

 private:
  int n_;
  std::vector<std::vector<Rational>> tables_;
};

template <typename Marginal>
Rational odd_subset_sum_impl(int n, SubsetMask a, std::uint32_t x, Marginal&& marginal) {
  const std::uint32_t full = SubsetMask::full(n).bits();
  const std::uint32_t rest = full & ~a.bits();
  Rational sum(0);
  // B = (N \ A) u S for every S subset of A, excluding B = N.
  std::uint32_t s = a.bits();
  while (true) {
    const std::uint32_t b = rest | s;
    if (b != full) {
      if (std::popcount(s) & 1) {
        sum -= marginal(b, x);
      } else {
        sum += marginal(b, x);
      }
    }
    if (s == 0) break;
    s = (s - 1) & a.bits();
  }
  return sum;
}

template <typename Marginal>
Rational q_impl(int n, std::uint32_t x, Marginal&& marginal) {
  const std::uint32_t full = SubsetMask::full(n).bits();
  Rational q(0);
  for (std::uint32_t b = 0; b < full; ++b) {
    const int gap = n - std::popcount(b);
    Rational term = marginal(b, x) * pow2(-gap);
    if ((gap - 1) % 2 == 0) {
      q += term;
    } else {
      q -= term;
    }
  }
  return q;
}

void require_theorem_input(const MarginalFamily& family) {
  if (!family.covers_all_proper_subsets()) {
    throw InputError("family must determine the marginal on every proper subset");
  }
  auto eq = check_equimarginal(family);
  if (!eq.equimarginal) throw NotEquimarginalError(*eq.witness);
}

void require_pairwise_triple(const MarginalFamily& family) {
  if (!family.is_pairwise_triple()) {
    throw InputError("expected n = 3 with exactly the tables on {1,2}, {1,3}, {2,3}");
  }
  auto eq = check_equimarginal(family);
  if (!eq.equimarginal) throw NotEquimarginalError(*eq.witness);
}

ClassicalVerdict violated(std::string inequality, SubsetMask subset, Outcome x, Rational value) {
  ClassicalVerdict v;
  v.compatible = false;
  v.witness = InequalityWitness{std::move(inequality), subset, x, std::move(value)};
  return v;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  static const std::regex kPattern(R"(^[0-9]+(/[0-9]+)?$)");
  if (!std::regex_match(text, kPattern)) {
    throw InputError("malformed rational \"" + text + "\"");
  }
  const auto slash = text.find('/');
  if (slash != std::string::npos && mpz_class(text.substr(slash + 1)) == 0) {
    throw InputError("zero denominator in \"" + text + "\"");
  }
  Rational value(text, 10);
  value.canonicalize();
  return value;
}

Rational parse_probability(const std::string& text) {
  Rational value = parse_rational(text);
  if (value > 1) throw InputError("probability \"" + text + "\" exceeds 1");
  return value;
}

std::string to_string(const Rational& value) {
  Rational canonical(value);
  canonical.canonicalize();
  return canonical.get_str();
}

Outcome::Outcome(int n, std::uint32_t bits) : n_(n), bits_(bits) {
  if (n < 0 || n > kMaxClassicalVariables) throw InputError("outcome length out of range");
  if ((bits >> n) != 0) throw InputError("outcome bits exceed its length");
}

Outcome Outcome::from_string(const std::string& bits) {
  std::uint32_t value = 0;
  if (bits.size() > static_cast<std::size_t>(kMaxClassicalVariables)) {
    throw InputError("outcome string too long");
  }
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      value |= 1u << i;
    } else if (bits[i] != '0') {
      throw InputError("outcome string must contain only 0 and 1");
    }
  }
  return Outcome(static_cast<int>(bits.size()), value);
}

int Outcome::operator[](int i) const {
  if (i < 1 || i > n_) throw InputError("outcome index out of range");
  return static_cast<int>((bits_ >> (i - 1)) & 1u);
}

std::string Outcome::to_string() const {
  std::string s;
  for (int i = 1; i <= n_; ++i) s += static_cast<char>('0' + (*this)[i]);
  return s;
}

int sigma_eval(SubsetMask a, const Outcome& x) {
  if (!a.within(x.n())) throw InputError("subset " + a.to_string() + " exceeds the outcome length");
  return parity_sign(a.bits() & x.bits());
}

Outcome flip(SubsetMask a, const Outcome& x) {
  if (!a.within(x.n())) throw InputError("subset " + a.to_string() + " exceeds the outcome length");
  return Outcome(x.n(), x.bits() ^ a.bits());
}

MarginalTable::MarginalTable(int n, SubsetMask subset, std::vector<Rational> values)
    : n_(n), subset_(subset), values_(std::move(values)) {
  check_n(n);
  if (!subset.within(n)) throw InputError("subset " + subset.to_string() + " not within 1.." + std::to_string(n));
  if (values_.size() != (std::size_t{1} << subset.size())) {
    throw InputError("table on " + subset.to_string() + " needs " +
                     std::to_string(std::size_t{1} << subset.size()) + " entries");
  }
  Rational total(0);
  for (const auto& v : values_) {
    if (v < 0) throw InputError("negative probability in table on " + subset.to_string());
    total += v;
  }
  if (total != 1) {
    throw InputError("table on " + subset.to_string() + " sums to " + total.get_str() + ", not 1");
  }
}

const Rational& MarginalTable::operator()(const Outcome& x) const {
  if (x.n() != n_) throw InputError("outcome length does not match the table");
  return values_[restriction_of(x.bits())];
}

std::string MarginalTable::restriction_key(std::uint32_t restriction) const {
  std::string key;
  for (int k = 0; k < subset_.size(); ++k) key += ((restriction >> k) & 1u) ? '1' : '0';
  return key;
}

JointTable::JointTable(int n, std::vector<Rational> values) : n_(n), values_(std::move(values)) {
  check_n(n);
  if (values_.size() != (std::size_t{1} << n)) throw InputError("joint table needs 2^n entries");
  Rational total(0);
  for (const auto& v : values_) {
    if (v < 0) throw InputError("negative joint probability");
    total += v;
  }
  if (total != 1) throw InputError("joint table sums to " + total.get_str() + ", not 1");
}

JointTable JointTable::uniform(int n) {
  check_n(n);
  const std::size_t size = std::size_t{1} << n;
  return JointTable(n, std::vector<Rational>(size, Rational(1, static_cast<unsigned long>(size))));
}

MarginalTable marginalize(const JointTable& joint, SubsetMask a) {
  const int n = joint.n();
  if (!a.within(n)) throw InputError("subset " + a.to_string() + " not within 1.." + std::to_string(n));
  if (a == SubsetMask::full(n)) throw InputError("marginal on the full set is the joint itself");
  std::vector<Rational> out(std::size_t{1} << a.size(), Rational(0));
  const auto values = joint.values();
  for (std::uint32_t x = 0; x < values.size(); ++x) out[gather_bits(x, a.bits())] += values[x];
  return MarginalTable(n, a, std::move(out));
}

MarginalTable marginalize(const MarginalTable& table, SubsetMask a) {
  if (!a.is_subset_of(table.subset())) {
    throw InputError(a.to_string() + " is not contained in " + table.subset().to_string());
  }
  std::vector<Rational> out(std::size_t{1} << a.size(), Rational(0));
  const auto values = table.values();
  for (std::uint32_t r = 0; r < values.size(); ++r) {
    const std::uint32_t bits = scatter_bits(r, table.subset().bits());
    out[gather_bits(bits, a.bits())] += values[r];
  }
  return MarginalTable(table.n(), a, std::move(out));
}

MarginalFamily::MarginalFamily(int n) : n_(n) { check_n(n); }

MarginalFamily MarginalFamily::from_joint(const JointTable& joint, std::span<const SubsetMask> subsets) {
  MarginalFamily family(joint.n());
  for (auto s : subsets) family.add(marginalize(joint, s));
  return family;
}

MarginalFamily MarginalFamily::maximal_from_joint(const JointTable& joint) {
  std::vector<SubsetMask> subsets;
  const auto full = SubsetMask::full(joint.n());
  for (int i = 1; i <= joint.n(); ++i) subsets.push_back(full - SubsetMask::of({i}));
  return from_joint(joint, subsets);
}

void MarginalFamily::add(MarginalTable table) {
  if (table.n() != n_) throw InputError("table n does not match the family");
  if (table.subset() == SubsetMask::full(n_)) throw InputError("the family may not store the full set");
  if (tables_.contains(table.subset())) throw InputError("duplicate table on " + table.subset().to_string());
  const auto key = table.subset();
  tables_.emplace(key, std::move(table));
}

const MarginalTable& MarginalFamily::table(SubsetMask a) const {
  auto it = tables_.find(a);
  if (it == tables_.end()) throw InputError("no table stored on " + a.to_string());
  return it->second;
}

std::optional<MarginalTable> MarginalFamily::derive(SubsetMask b) const {
  if (b.empty()) return MarginalTable(n_, b, {Rational(1)});
  for (const auto& [subset, table] : tables_) {
    if (b == subset) return table;
    if (b.is_subset_of(subset)) return marginalize(table, b);
  }
  return std::nullopt;
}

bool MarginalFamily::covers_all_proper_subsets() const {
  const auto full = SubsetMask::full(n_);
  for (int i = 1; i <= n_; ++i) {
    const auto maximal = full - SubsetMask::of({i});
    const bool covered = std::any_of(tables_.begin(), tables_.end(),
                                     [&](const auto& kv) { return maximal.is_subset_of(kv.first); });
    if (!covered) return false;
  }
  return true;
}

bool MarginalFamily::is_pairwise_triple() const {
  return n_ == 3 && tables_.size() == 3 && contains(SubsetMask::of({1, 2})) &&
         contains(SubsetMask::of({1, 3})) && contains(SubsetMask::of({2, 3}));
}

NotEquimarginalError::NotEquimarginalError(EquimarginalWitness w)
    : InputError("family is not equimarginal: " + w.first.to_string() + " and " + w.second.to_string() +
                 " disagree on " + w.common.to_string()),
      witness_(w) {}

EquimarginalReport check_equimarginal(const MarginalFamily& family) {
  const auto& tables = family.tables();
  for (auto i = tables.begin(); i != tables.end(); ++i) {
    for (auto j = std::next(i); j != tables.end(); ++j) {
      const auto common = i->first & j->first;
      if (common.empty()) continue;
      if (marginalize(i->second, common) != marginalize(j->second, common)) {
        return {false, EquimarginalWitness{i->first, j->first, common}};
      }
    }
  }
  return {};
}

SigmaCoefficients coefficients_from_family(const MarginalFamily& family) {
  auto eq = check_equimarginal(family);
  if (!eq.equimarginal) throw NotEquimarginalError(*eq.witness);
  const int n = family.n();

  std::map<SubsetMask, Rational> at_zero;  // P_D evaluated at x = 0
  auto marginal_at_zero = [&](SubsetMask d) -> const Rational& {
    auto it = at_zero.find(d);
    if (it == at_zero.end()) it = at_zero.emplace(d, family.derive(d)->at_restriction(0)).first;
    return it->second;
  };

  SigmaCoefficients out;
  out.n = n;
  out.coeffs.emplace(SubsetMask(), pow2(-n));
  for (const auto& [stored, table] : family.tables()) {
    std::uint32_t b = stored.bits();
    for (; b != 0; b = (b - 1) & stored.bits()) {
      const SubsetMask bm(b);
      if (out.coeffs.contains(bm)) continue;
      // sigma_B(0) = 1, so c_B equals the inclusion-exclusion sum at x = 0.
      Rational c(0);
      std::uint32_t d = b;
      while (true) {
        const SubsetMask dm(d);
        Rational term = marginal_at_zero(dm) * pow2(dm.size() - n);
        if ((bm.size() - dm.size()) % 2 == 0) {
          c += term;
        } else {
          c -= term;
        }
        if (d == 0) break;
        d = (d - 1) & b;
      }
      out.coeffs.emplace(bm, std::move(c));
    }
  }
  return out;
}

Rational marginal_from_coefficients(const SigmaCoefficients& coeffs, SubsetMask a, const Outcome& x) {
  if (x.n() != coeffs.n || !a.within(coeffs.n)) throw InputError("subset or outcome does not match n");
  Rational sum(0);
  std::uint32_t b = a.bits();
  while (true) {
    auto it = coeffs.coeffs.find(SubsetMask(b));
    if (it == coeffs.coeffs.end()) throw InputError("missing coefficient for " + SubsetMask(b).to_string());
    if (parity_sign(b & x.bits()) > 0) {
      sum += it->second;
    } else {
      sum -= it->second;
    }
    if (b == 0) break;
    b = (b - 1) & a.bits();
  }
  return sum * pow2(coeffs.n - a.size());
}

Rational wigner_slack(const MarginalFamily& family, int a, int b, const Outcome& x) {
  require_pairwise_triple(family);
  if (a == b || a < 1 || a > 3 || b < 1 || b > 3) throw InputError("wigner indices must be distinct in 1..3");
  if (x.n() != 3) throw InputError("outcome must have three variables");
  const int c = 6 - a - b;
  const auto& p_ab = family.table(SubsetMask::of({a, b}));
  const auto& p_ac = family.table(SubsetMask::of({a, c}));
  const auto& p_bc = family.table(SubsetMask::of({b, c}));
  return p_ac(x) + p_bc(flip(SubsetMask::of({c}), x)) - p_ab(x);
}

ClassicalVerdict check_wigner(const MarginalFamily& family) {
  require_pairwise_triple(family);
  std::array<int, 3> perm{1, 2, 3};
  do {
    const int a = perm[0], b = perm[1], c = perm[2];
    for (std::uint32_t bits = 0; bits < 8; ++bits) {
      const Outcome x(3, bits);
      Rational slack = wigner_slack(family, a, b, x);
      if (slack < 0) {
        return violated("wigner: P_ab(x_a,x_b) <= P_ac(x_a,x_c) + P_bc(x_b,not x_c), a=" + std::to_string(a) +
                            ",b=" + std::to_string(b) + ",c=" + std::to_string(c),
                        SubsetMask::of({a, b}), x, std::move(slack));
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {};
}

Rational delta3(const MarginalFamily& family, const Outcome& x) {
  require_pairwise_triple(family);
  if (x.n() != 3) throw InputError("outcome must have three variables");
  Rational delta(1);
  for (int i = 1; i <= 3; ++i) delta -= (*family.derive(SubsetMask::of({i})))(x);
  for (const auto& [subset, table] : family.tables()) delta += table(x);
  return delta;
}

Rational odd_subset_sum(const MarginalFamily& family, SubsetMask a, const Outcome& x) {
  const int n = family.n();
  if (x.n() != n || !a.within(n)) throw InputError("subset or outcome does not match n");
  if (a.size() % 2 == 0) throw InputError("subset " + a.to_string() + " must have odd size");
  return odd_subset_sum_impl(n, a, x.bits(), [&](std::uint32_t b, std::uint32_t bits) -> Rational {
    auto table = family.derive(SubsetMask(b));
    if (!table) throw InputError("family does not determine the marginal on " + SubsetMask(b).to_string());
    return table->at_restriction(table->restriction_of(bits));
  });
}

ClassicalVerdict check_theorem2(const MarginalFamily& family) {
  require_theorem_input(family);
  const int n = family.n();
  const ExpandedMarginals marginals(family);
  const auto lookup = [&](std::uint32_t b, std::uint32_t x) -> const Rational& { return marginals.at(b, x); };
  const std::uint32_t full = SubsetMask::full(n).bits();
  for (std::uint32_t a = 1; a <= full; ++a) {
    if (std::popcount(a) % 2 == 0) continue;
    for (std::uint32_t x = 0; x <= full; ++x) {
      Rational sum = odd_subset_sum_impl(n, SubsetMask(a), x, lookup);
      if (sum < 0 || sum > 1) {
        return violated("odd-subset: 0 <= sum_B (-1)^|A n B| P_B(x) <= 1", SubsetMask(a), Outcome(n, x),
                        std::move(sum));
      }
    }
  }
  return {};
}

Rational q_function(const MarginalFamily& family, const Outcome& x) {
  if (x.n() != family.n()) throw InputError("outcome length does not match n");
  return q_table(family)[x.bits()];
}

std::vector<Rational> q_table(const MarginalFamily& family) {
  require_theorem_input(family);
  const int n = family.n();
  const ExpandedMarginals marginals(family);
  const auto lookup = [&](std::uint32_t b, std::uint32_t x) -> const Rational& { return marginals.at(b, x); };
  std::vector<Rational> q;
  const std::uint32_t outcomes = 1u << n;
  q.reserve(outcomes);
  for (std::uint32_t x = 0; x < outcomes; ++x) q.push_back(q_impl(n, x, lookup));
  return q;
}

ClassicalVerdict check_theorem3(const MarginalFamily& family) {
  const int n = family.n();
  const auto q = q_table(family);
  const Rational lower = -pow2(-n);
  const Rational upper = 1 - pow2(-n);
  const std::uint32_t full = SubsetMask::full(n).bits();
  for (std::uint32_t x = 0; x <= full; ++x) {
    if (q[x] < lower || q[x] > upper) {
      return violated("q-bounds: -2^-n <= Q(x) <= 1 - 2^-n", SubsetMask(), Outcome(n, x), q[x]);
    }
  }
  for (std::uint32_t a = 1; a <= full; ++a) {
    if (std::popcount(a) % 2 == 0) continue;
    for (std::uint32_t x = 0; x <= full; ++x) {
      Rational pair = q[x] + q[x ^ a];
      if (pair < 0 || pair > 2) {
        return violated("q-pair: 0 <= Q(x) + Q(flip(A,x)) <= 2", SubsetMask(a), Outcome(n, x), std::move(pair));
      }
    }
  }
  return {};
}

Reconstruction reconstruct_joint(const MarginalFamily& family) {
  Reconstruction out;
  out.verdict = check_theorem2(family);
  if (!out.verdict.compatible) return out;

  const int n = family.n();
  const auto q = q_table(family);
  const std::uint32_t full = SubsetMask::full(n).bits();
  std::optional<Rational> lower, upper;
  auto raise = [](std::optional<Rational>& bound, const Rational& v) {
    if (!bound || v > *bound) bound = v;
  };
  auto drop = [](std::optional<Rational>& bound, const Rational& v) {
    if (!bound || v < *bound) bound = v;
  };
  for (std::uint32_t x = 0; x <= full; ++x) {
    if (parity_sign(x & full) > 0) {
      raise(lower, -q[x]);
      drop(upper, 1 - q[x]);
    } else {
      raise(lower, q[x] - 1);
      drop(upper, q[x]);
    }
  }
  if (*lower > *upper) {
    throw NumericError("empty interval for the top coefficient despite the odd-subset conditions holding");
  }
  Rational chosen = (*lower + *upper) / 2;

  std::vector<Rational> joint;
  joint.reserve(q.size());
  for (std::uint32_t x = 0; x <= full; ++x) {
    joint.push_back(parity_sign(x & full) > 0 ? Rational(q[x] + chosen) : Rational(q[x] - chosen));
  }
  out.verdict.certificate = JointTable(n, std::move(joint));
  out.interval = TopCoefficientInterval{*lower, *upper, std::move(chosen)};
  return out;
}

}  // namespace subcompat
