#include "subcompat/lp_oracle.hpp"

#include <utility>

namespace subcompat {
namespace {

using Row = std::vector<Rational>;

// Reduces [A | b] to row-echelon form in place and drops the zero rows.
// Returns false when a dropped row has a nonzero right-hand side.
bool eliminate_redundant_rows(std::vector<Row>& a, Row& b) {
  const std::size_t m = a.size();
  const std::size_t cols = m == 0 ? 0 : a.front().size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < m; ++col) {
    std::size_t pivot = rank;
    while (pivot < m && a[pivot][col] == 0) ++pivot;
    if (pivot == m) continue;
    std::swap(a[pivot], a[rank]);
    std::swap(b[pivot], b[rank]);
    const Rational inv = 1 / a[rank][col];
    for (std::size_t j = col; j < cols; ++j) a[rank][j] *= inv;
    b[rank] *= inv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == rank || a[i][col] == 0) continue;
      const Rational factor = a[i][col];
      for (std::size_t j = col; j < cols; ++j) {
        if (a[rank][j] != 0) a[i][j] -= factor * a[rank][j];
      }
      b[i] -= factor * b[rank];
    }
    ++rank;
  }
  for (std::size_t i = rank; i < m; ++i) {
    if (b[i] != 0) return false;
  }
  a.resize(rank);
  b.resize(rank);
  return true;
}

}  // namespace

FeasibilitySystem build_system(const MarginalFamily& family, int max_n) {
  const int n = family.n();
  if (n > max_n) {
    throw ResourceError("oracle supports at most " + std::to_string(max_n) + " variables, got " + std::to_string(n));
  }
  FeasibilitySystem system;
  system.n = n;
  system.num_vars = std::size_t{1} << n;
  for (const auto& [subset, table] : family.tables()) {
    for (std::uint32_t r = 0; r < table.values().size(); ++r) {
      EqualityRow row{Row(system.num_vars, Rational(0)), table.at_restriction(r)};
      for (std::uint32_t x = 0; x < system.num_vars; ++x) {
        if (table.restriction_of(x) == r) row.coeffs[x] = 1;
      }
      system.equalities.push_back(std::move(row));
    }
  }
  system.equalities.push_back(EqualityRow{Row(system.num_vars, Rational(1)), Rational(1)});
  return system;
}

OracleVerdict solve_feasibility(const FeasibilitySystem& system) {
  const std::size_t nv = system.num_vars;
  std::vector<Row> a;
  Row b;
  for (const auto& eq : system.equalities) {
    if (eq.coeffs.size() != nv) throw InputError("equality row length does not match the variable count");
    a.push_back(eq.coeffs);
    b.push_back(eq.rhs);
  }
  if (!eliminate_redundant_rows(a, b)) return {};

  const std::size_t m = a.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0) {
      for (auto& v : a[i]) v = -v;
      b[i] = -b[i];
    }
  }

  // Tableau columns: nv structural, m artificial, then the right-hand side.
  const std::size_t width = nv + m + 1;
  const std::size_t rhs = width - 1;
  std::vector<Row> t(m + 1, Row(width, Rational(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nv; ++j) t[i][j] = a[i][j];
    t[i][nv + i] = 1;
    t[i][rhs] = b[i];
    basis[i] = nv + i;
  }
  // Reduced costs of the phase-one objective (sum of artificials).
  Row& cost = t[m];
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nv; ++j) cost[j] -= t[i][j];
    cost[rhs] -= t[i][rhs];
  }

  while (true) {
    // Bland: lowest-index structural column with negative reduced cost.
    std::size_t enter = nv;
    for (std::size_t j = 0; j < nv; ++j) {
      if (cost[j] < 0) {
        enter = j;
        break;
      }
    }
    if (enter == nv) break;

    std::size_t leave = m;
    Rational best;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= 0) continue;
      Rational ratio = t[i][rhs] / t[i][enter];
      if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
        leave = i;
        best = std::move(ratio);
      }
    }
    if (leave == m) throw NumericError("phase-one objective unbounded; tableau is corrupt");

    const Rational inv = 1 / t[leave][enter];
    for (auto& v : t[leave]) {
      if (v != 0) v *= inv;
    }
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      const Rational factor = t[i][enter];
      for (std::size_t j = 0; j < width; ++j) {
        if (t[leave][j] != 0) t[i][j] -= factor * t[leave][j];
      }
    }
    basis[leave] = enter;
  }

  if (cost[rhs] != 0) return {};

  std::vector<Rational> x(nv, Rational(0));
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < nv) x[basis[i]] = t[i][rhs];
  }
  OracleVerdict verdict;
  verdict.feasible = true;
  verdict.solution = JointTable(system.n, std::move(x));
  return verdict;
}

}  // namespace subcompat
