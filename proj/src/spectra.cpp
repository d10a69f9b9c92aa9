#include "subcompat/spectra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace subcompat {
namespace {

constexpr double kTol = kSpectrumTolerance;

bool holds(double lhs, double rhs) { return lhs <= rhs + kTol; }

CriterionVerdict fail(std::string what) { return {false, std::move(what)}; }

std::string idx(const char* name, std::size_t v) { return std::string(name) + "=" + std::to_string(v); }

// The seven per-party combinations used by the qutrit criterion.
struct QutritCombos {
  double alpha, beta, gamma, delta, epsilon, zeta, eta;
};

QutritCombos combos(const Spectrum& s) {
  const double l1 = s[0], l2 = s[1], l3 = s[2];
  return {l1 + l2, l1 + l3, l2 + l3, l1 + 2 * l2, 2 * l1 + l2, 2 * l2 + l3, 2 * l3 + l2};
}

}  // namespace

Spectrum::Spectrum(std::vector<double> values, bool full) : values_(std::move(values)) {
  if (values_.empty()) throw InputError("spectrum is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v) || v < -kTol || v > 1.0 + kTol) throw InputError("spectrum value outside [0, 1]");
    if (i > 0 && v < values_[i - 1] - kTol) throw InputError("spectrum is not ascending");
  }
  if (full) {
    const double total = std::accumulate(values_.begin(), values_.end(), 0.0);
    if (std::abs(total - 1.0) > kTol) throw InputError("spectrum does not sum to 1");
  }
}

double Spectrum::partial_sum(std::size_t p) const {
  return std::accumulate(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(std::min(p, values_.size())),
                         0.0);
}

CriterionVerdict check_polygon(std::span<const double> lams) {
  for (double l : lams) {
    if (!std::isfinite(l) || l < -kTol || l > 0.5 + kTol) {
      throw InputError("polygon inputs must be smaller qubit eigenvalues in [0, 1/2]");
    }
  }
  const double total = std::accumulate(lams.begin(), lams.end(), 0.0);
  for (std::size_t i = 0; i < lams.size(); ++i) {
    if (!holds(lams[i], total - lams[i])) {
      return fail("polygon: lambda_i <= sum_{j!=i} lambda_j, " + idx("i", i + 1));
    }
  }
  return {};
}

CriterionVerdict check_higuchi(const Spectrum& s1, const Spectrum& s2, const Spectrum& s3) {
  if (s1.size() != 3 || s2.size() != 3 || s3.size() != 3) throw InputError("qutrit spectra need three values each");
  const std::array<QutritCombos, 3> c{combos(s1), combos(s2), combos(s3)};
  std::array<std::size_t, 3> perm{0, 1, 2};
  do {
    const auto& a = c[perm[0]];
    const auto& b = c[perm[1]];
    const auto& cc = c[perm[2]];
    const std::string where =
        ", " + idx("a", perm[0] + 1) + "," + idx("b", perm[1] + 1) + "," + idx("c", perm[2] + 1);
    if (!holds(a.alpha, b.alpha + cc.alpha)) return fail("higuchi: alpha_a <= alpha_b + alpha_c" + where);
    if (!holds(a.beta, b.alpha + cc.beta)) return fail("higuchi: beta_a <= alpha_b + beta_c" + where);
    if (!holds(a.gamma, b.alpha + cc.beta)) return fail("higuchi: gamma_a <= alpha_b + beta_c" + where);
    if (!holds(a.delta, b.delta + cc.delta)) return fail("higuchi: delta_a <= delta_b + delta_c" + where);
    if (!holds(a.epsilon, b.delta + cc.epsilon)) return fail("higuchi: epsilon_a <= delta_b + epsilon_c" + where);
    if (!holds(a.zeta, b.delta + cc.zeta)) return fail("higuchi: zeta_a <= delta_b + zeta_c" + where);
    if (!holds(a.zeta, b.epsilon + cc.eta)) return fail("higuchi: zeta_a <= epsilon_b + eta_c" + where);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {};
}

CriterionVerdict check_bravyi(double l1, double l2, const Spectrum& s3) {
  for (double l : {l1, l2}) {
    if (!std::isfinite(l) || l < -kTol || l > 0.5 + kTol) {
      throw InputError("qubit inputs must be smaller eigenvalues in [0, 1/2]");
    }
  }
  if (s3.size() != 4) throw InputError("the third party needs a four-level spectrum");
  const double lam3 = s3[0], mu3 = s3[1], nu3 = s3[2], xi3 = s3[3];
  if (!holds(lam3 + mu3, l1)) return fail("bravyi: lambda_a >= lambda_3 + mu_3, a=1");
  if (!holds(lam3 + mu3, l2)) return fail("bravyi: lambda_a >= lambda_3 + mu_3, a=2");
  if (!holds(2 * lam3 + mu3 + nu3, l1 + l2)) return fail("bravyi: lambda_1 + lambda_2 >= 2 lambda_3 + mu_3 + nu_3");
  if (!holds(std::abs(l1 - l2), std::min(nu3 - lam3, xi3 - mu3))) {
    return fail("bravyi: |lambda_1 - lambda_2| <= min(nu_3 - lambda_3, xi_3 - mu_3)");
  }
  return {};
}

NecessityVerdict check_hzg(std::span<const Spectrum> spectra, std::size_t m) {
  if (spectra.size() < 2) throw InputError("need at least two spectra");
  if (m < 2) throw InputError("one-particle dimension must be at least 2");
  for (const auto& s : spectra) {
    if (s.size() != m) throw InputError("every spectrum must have m values");
  }
  const std::size_t n = spectra.size();
  std::vector<double> tail(n);  // sum of the m - 1 smallest eigenvalues
  for (std::size_t c = 0; c < n; ++c) tail[c] = spectra[c].partial_sum(m - 1);
  const double tail_total = std::accumulate(tail.begin(), tail.end(), 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const double others = tail_total - tail[a] - tail[b];
      for (std::size_t p = 1; p < m; ++p) {
        if (!holds(spectra[a].partial_sum(p), spectra[b].partial_sum(p) + others)) {
          return {false, "hzg: sum_{i<=p} lambda_i^(a) <= sum_{i<=p} lambda_i^(b) + sum_{c!=a,b} sum_{i<m} "
                         "lambda_i^(c), " +
                             idx("a", a + 1) + "," + idx("b", b + 1) + "," + idx("p", p)};
        }
      }
    }
  }
  return {};
}

CriterionVerdict check_coleman(const Spectrum& spectrum, int n_fermions) {
  if (n_fermions < 1) throw InputError("number of fermions must be positive");
  const double bound = 1.0 / n_fermions;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (!holds(spectrum[i], bound)) return fail("coleman: lambda <= 1/n, " + idx("i", i + 1));
  }
  return {};
}

}  // namespace subcompat
