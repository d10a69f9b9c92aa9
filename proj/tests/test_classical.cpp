#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <regex>

#include "subcompat/classical.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace subcompat;

namespace {

Rational q(const char* text) { return parse_rational(text); }

MarginalTable pair_table(SubsetMask s, const char* v00, const char* v10, const char* v01, const char* v11) {
  // restriction index: bit 0 = smaller member
  return MarginalTable(3, s, {q(v00), q(v10), q(v01), q(v11)});
}

MarginalFamily pairwise(const JointTable& p) {
  const std::vector<SubsetMask> subsets{SubsetMask::of({1, 2}), SubsetMask::of({1, 3}), SubsetMask::of({2, 3})};
  return MarginalFamily::from_joint(p, subsets);
}

JointTable ghz_joint() {
  std::vector<Rational> v(8, Rational(0));
  v[0] = v[7] = Rational(1, 2);
  return JointTable(3, v);
}

MarginalFamily anticorrelated() {
  MarginalFamily f(3);
  for (auto s : {SubsetMask::of({1, 2}), SubsetMask::of({1, 3}), SubsetMask::of({2, 3})}) {
    f.add(pair_table(s, "0", "1/2", "1/2", "0"));
  }
  return f;
}

std::pair<int, int> wigner_indices(const std::string& label) {
  std::smatch m;
  REQUIRE(std::regex_search(label, m, std::regex("a=([0-9]),b=([0-9])")));
  return {std::stoi(m[1]), std::stoi(m[2])};
}

}  // namespace

TEST_CASE("rational parsing") {
  CHECK(parse_rational("3/6") == Rational(1, 2));
  CHECK(parse_rational("2") == Rational(2));
  CHECK(to_string(Rational(2, 4)) == "1/2");
  CHECK(to_string(Rational(0)) == "0");
  CHECK_THROWS_AS(parse_rational("3/0"), InputError);
  CHECK_THROWS_AS(parse_rational("-1/2"), InputError);
  CHECK_THROWS_AS(parse_rational("0.5"), InputError);
  CHECK_THROWS_AS(parse_probability("3/2"), InputError);
  CHECK(parse_probability("1") == Rational(1));
}

TEST_CASE("sigma_eval") {
  CHECK(sigma_eval(SubsetMask(), Outcome::from_string("101")) == 1);
  CHECK(sigma_eval(SubsetMask::of({1, 2, 3}), Outcome::from_string("111")) == -1);
  CHECK(sigma_eval(SubsetMask::of({1, 3}), Outcome::from_string("101")) == 1);
  CHECK_THROWS_AS(sigma_eval(SubsetMask::of({4}), Outcome::from_string("101")), InputError);
}

TEST_CASE("flip") {
  CHECK(flip(SubsetMask::of({1}), Outcome::from_string("01")) == Outcome::from_string("11"));
  CHECK(flip(SubsetMask(), Outcome::from_string("01")) == Outcome::from_string("01"));
  CHECK(flip(SubsetMask::of({1, 2, 3}), Outcome::from_string("000")) == Outcome::from_string("111"));
  for (std::uint32_t a = 0; a < 16; ++a) {
    for (std::uint32_t x = 0; x < 16; ++x) {
      const Outcome o(4, x);
      CHECK(flip(SubsetMask(a), flip(SubsetMask(a), o)) == o);
    }
  }
}

TEST_CASE("outcome string and indexing") {
  const Outcome x = Outcome::from_string("100");
  CHECK(x[1] == 1);
  CHECK(x[2] == 0);
  CHECK(x.to_string() == "100");
  CHECK_THROWS_AS(Outcome::from_string("102"), InputError);
}

TEST_CASE("table validation") {
  CHECK_THROWS_AS(MarginalTable(2, SubsetMask::of({1}), {q("1/2"), q("1/3")}), InputError);
  CHECK_THROWS_AS(MarginalTable(2, SubsetMask::of({1}), {q("1")}), InputError);
  CHECK_THROWS_AS(JointTable(1, {q("1/2"), q("1/4")}), InputError);
  MarginalFamily f(3);
  CHECK_THROWS_AS(f.add(MarginalTable(3, SubsetMask::full(3), std::vector<Rational>(8, Rational(1, 8)))),
                  InputError);
  f.add(pair_table(SubsetMask::of({1, 2}), "1/4", "1/4", "1/4", "1/4"));
  CHECK_THROWS_AS(f.add(pair_table(SubsetMask::of({1, 2}), "1/4", "1/4", "1/4", "1/4")), InputError);
}

TEST_CASE("marginalize") {
  const auto uniform = marginalize(JointTable::uniform(3), SubsetMask::of({1, 2}));
  for (auto v : uniform.values()) CHECK(v == Rational(1, 4));

  const auto ghz = marginalize(ghz_joint(), SubsetMask::of({1, 2}));
  CHECK(ghz(Outcome::from_string("000")) == Rational(1, 2));
  CHECK(ghz(Outcome::from_string("110")) == Rational(1, 2));
  CHECK(ghz(Outcome::from_string("010")) == 0);
  CHECK(ghz(Outcome::from_string("100")) == 0);

  std::vector<Rational> point(8, Rational(0));
  point[0] = 1;
  const auto det = marginalize(JointTable(3, point), SubsetMask::of({2}));
  CHECK(det.at_restriction(0) == 1);
  CHECK(det.at_restriction(1) == 0);

  CHECK_THROWS_AS(marginalize(JointTable::uniform(3), SubsetMask::full(3)), InputError);
}

TEST_CASE("marginal tables are constant outside their subset") {
  std::mt19937_64 rng(7);
  const auto p = testgen::random_joint(4, rng);
  const auto t = marginalize(p, SubsetMask::of({2, 4}));
  for (std::uint32_t x = 0; x < 16; ++x) {
    CHECK(t(Outcome(4, x)) == t(Outcome(4, x ^ 0b0101u)));
  }
  CHECK(t.restriction_key(1) == "10");  // x_2 = 1, x_4 = 0
}

TEST_CASE("check_equimarginal") {
  CHECK(check_equimarginal(pairwise(JointTable::uniform(3))).equimarginal);

  MarginalFamily bad(3);
  bad.add(pair_table(SubsetMask::of({1, 2}), "1/4", "1/4", "1/4", "1/4"));
  bad.add(pair_table(SubsetMask::of({1, 3}), "3/8", "1/8", "3/8", "1/8"));
  const auto report = check_equimarginal(bad);
  CHECK_FALSE(report.equimarginal);
  REQUIRE(report.witness);
  CHECK(report.witness->common == SubsetMask::of({1}));

  MarginalFamily single(3);
  single.add(pair_table(SubsetMask::of({1, 2}), "1/2", "0", "0", "1/2"));
  CHECK(check_equimarginal(single).equimarginal);
}

TEST_CASE("coefficients_from_family") {
  const auto uniform = coefficients_from_family(pairwise(JointTable::uniform(3)));
  CHECK(uniform.at(SubsetMask()) == Rational(1, 8));
  for (const auto& [a, c] : uniform.coeffs) {
    if (!a.empty()) CHECK(c == 0);
  }

  const auto ghz = coefficients_from_family(pairwise(ghz_joint()));
  const auto expected = testgen::coefficients_of(ghz_joint());
  CHECK(ghz.at(SubsetMask()) == Rational(1, 8));
  for (auto s : {SubsetMask::of({1, 2}), SubsetMask::of({1, 3}), SubsetMask::of({2, 3})}) {
    CHECK(ghz.at(s) == Rational(1, 8));
    CHECK(ghz.at(s) == expected[s.bits()]);
  }
  for (int i = 1; i <= 3; ++i) CHECK(ghz.at(SubsetMask::of({i})) == 0);
  CHECK_FALSE(ghz.coeffs.contains(SubsetMask::full(3)));

  MarginalFamily one(2);
  one.add(MarginalTable(2, SubsetMask::of({1}), {q("3/4"), q("1/4")}));
  const auto c1 = coefficients_from_family(one);
  CHECK(c1.at(SubsetMask()) == Rational(1, 4));
  CHECK(c1.at(SubsetMask::of({1})) == Rational(1, 8));

  MarginalFamily bad(3);
  bad.add(pair_table(SubsetMask::of({1, 2}), "1/4", "1/4", "1/4", "1/4"));
  bad.add(pair_table(SubsetMask::of({1, 3}), "3/8", "1/8", "3/8", "1/8"));
  CHECK_THROWS_AS(coefficients_from_family(bad), NotEquimarginalError);
}

TEST_CASE("coefficients match the orthogonality oracle and rebuild every table") {
  std::mt19937_64 rng(11);
  for (int n = 2; n <= 5; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = testgen::random_joint(n, rng);
      const auto family = MarginalFamily::maximal_from_joint(p);
      const auto coeffs = coefficients_from_family(family);
      const auto expected = testgen::coefficients_of(p);
      CHECK(coeffs.at(SubsetMask()) == testgen::pow2(-n));
      for (const auto& [a, c] : coeffs.coeffs) CHECK(c == expected[a.bits()]);
      for (const auto& [a, table] : family.tables()) {
        for (std::uint32_t x = 0; x < (1u << n); ++x) {
          CHECK(marginal_from_coefficients(coeffs, a, Outcome(n, x)) == table(Outcome(n, x)));
        }
      }
    }
  }
}

TEST_CASE("check_wigner") {
  CHECK(check_wigner(pairwise(JointTable::uniform(3))).compatible);
  CHECK(check_wigner(pairwise(ghz_joint())).compatible);

  const auto verdict = check_wigner(anticorrelated());
  CHECK_FALSE(verdict.compatible);
  REQUIRE(verdict.witness);
  const auto [a, b] = wigner_indices(verdict.witness->inequality);
  CHECK(verdict.witness->subset == SubsetMask::of({a, b}));
  CHECK(wigner_slack(anticorrelated(), a, b, verdict.witness->x) == verdict.witness->value);
  CHECK(verdict.witness->value < 0);
  CHECK_FALSE(oracle::brute_force_feasible(anticorrelated()));

  MarginalFamily wrong(3);
  wrong.add(pair_table(SubsetMask::of({1, 2}), "1/4", "1/4", "1/4", "1/4"));
  CHECK_THROWS_AS(check_wigner(wrong), InputError);
}

TEST_CASE("delta3") {
  for (std::uint32_t x = 0; x < 8; ++x) CHECK(delta3(pairwise(JointTable::uniform(3)), Outcome(3, x)) == Rational(1, 4));
  CHECK(delta3(pairwise(ghz_joint()), Outcome::from_string("000")) == 1);
  CHECK(delta3(anticorrelated(), Outcome::from_string("000")) == Rational(-1, 2));
}

TEST_CASE("delta3 equals P(x) + P(complement of x)") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = testgen::random_joint(3, rng);
    const auto f = pairwise(p);
    for (std::uint32_t x = 0; x < 8; ++x) {
      const Outcome o(3, x);
      CHECK(delta3(f, o) == p(o) + p(flip(SubsetMask::full(3), o)));
    }
  }
}

TEST_CASE("check_theorem2") {
  // n = 3, A = N: the odd-subset sum is delta3
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = testgen::random_family(3, rng, trial % 2 == 1);
    for (std::uint32_t x = 0; x < 8; ++x) {
      CHECK(odd_subset_sum(f, SubsetMask::full(3), Outcome(3, x)) == delta3(f, Outcome(3, x)));
      // A = {1}: only B = {2,3} contributes
      CHECK(odd_subset_sum(f, SubsetMask::of({1}), Outcome(3, x)) == f.table(SubsetMask::of({2, 3}))(Outcome(3, x)));
    }
  }

  const auto verdict = check_theorem2(anticorrelated());
  CHECK_FALSE(verdict.compatible);
  REQUIRE(verdict.witness);
  CHECK(verdict.witness->subset == SubsetMask::of({1, 2, 3}));
  CHECK(verdict.witness->x == Outcome::from_string("000"));
  CHECK(verdict.witness->value == Rational(-1, 2));
  CHECK(odd_subset_sum(anticorrelated(), verdict.witness->subset, verdict.witness->x) == verdict.witness->value);

  MarginalFamily partial(3);
  partial.add(pair_table(SubsetMask::of({1, 2}), "1/4", "1/4", "1/4", "1/4"));
  CHECK_THROWS_AS(check_theorem2(partial), InputError);
}

TEST_CASE("q_function") {
  const auto uniform = pairwise(JointTable::uniform(3));
  for (std::uint32_t x = 0; x < 8; ++x) CHECK(q_function(uniform, Outcome(3, x)) == Rational(1, 8));
  CHECK(q_function(pairwise(ghz_joint()), Outcome::from_string("000")) == Rational(1, 2));

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = testgen::random_family(3, rng, trial % 2 == 0);
    for (std::uint32_t x = 0; x < 8; ++x) {
      const Outcome o(3, x);
      Rational singles(0), pairs(0);
      for (int i = 1; i <= 3; ++i) singles += (*f.derive(SubsetMask::of({i})))(o);
      for (const auto& [s, t] : f.tables()) pairs += t(o);
      CHECK(q_function(f, o) == Rational(1, 8) - singles / 4 + pairs / 2);
    }
  }
}

TEST_CASE("check_theorem3") {
  CHECK(check_theorem3(pairwise(JointTable::uniform(3))).compatible);
  CHECK(check_theorem3(pairwise(ghz_joint())).compatible);
  const auto verdict = check_theorem3(anticorrelated());
  CHECK_FALSE(verdict.compatible);
  REQUIRE(verdict.witness);
  const auto& w = *verdict.witness;
  if (w.subset.empty()) {
    CHECK(q_function(anticorrelated(), w.x) == w.value);
  } else {
    CHECK(q_function(anticorrelated(), w.x) + q_function(anticorrelated(), flip(w.subset, w.x)) == w.value);
  }
}

TEST_CASE("reconstruct_joint") {
  const auto uniform = reconstruct_joint(pairwise(JointTable::uniform(3)));
  REQUIRE(uniform.verdict.compatible);
  REQUIRE(uniform.interval);
  CHECK(uniform.interval->lower == Rational(-1, 8));
  CHECK(uniform.interval->upper == Rational(1, 8));
  CHECK(uniform.interval->chosen == 0);
  CHECK(*uniform.verdict.certificate == JointTable::uniform(3));

  const auto ghz = reconstruct_joint(pairwise(ghz_joint()));
  REQUIRE(ghz.verdict.compatible);
  CHECK(ghz.interval->lower == 0);
  CHECK(ghz.interval->upper == 0);
  CHECK(*ghz.verdict.certificate == ghz_joint());

  const auto refused = reconstruct_joint(anticorrelated());
  CHECK_FALSE(refused.verdict.compatible);
  CHECK_FALSE(refused.verdict.certificate);
  CHECK_FALSE(refused.interval);
  REQUIRE(refused.verdict.witness);
  CHECK(refused.verdict.witness->subset == SubsetMask::full(3));
}

TEST_CASE("round trip through the maximal-subset family") {
  std::mt19937_64 rng(17);
  for (int n = 2; n <= 5; ++n) {
    for (int trial = 0; trial < 25; ++trial) {
      const auto p = testgen::random_joint(n, rng);
      const auto f = MarginalFamily::maximal_from_joint(p);
      CHECK(check_equimarginal(f).equimarginal);
      CHECK(check_theorem2(f).compatible);
      CHECK(check_theorem3(f).compatible);
      const auto rec = reconstruct_joint(f);
      REQUIRE(rec.verdict.compatible);
      for (const auto& [a, t] : f.tables()) CHECK(marginalize(*rec.verdict.certificate, a) == t);
      CHECK(rec.interval->lower <= rec.interval->upper);
    }
  }
}

TEST_CASE("odd-subset conditions bound Q") {
  std::mt19937_64 rng(19);
  for (int n = 2; n <= 4; ++n) {
    const Rational low = -testgen::pow2(-n);
    const Rational high = 1 - testgen::pow2(-n);
    for (int trial = 0; trial < 60; ++trial) {
      const auto f = testgen::random_family(n, rng, true);
      if (!check_theorem2(f).compatible) continue;
      for (const auto& v : q_table(f)) {
        CHECK(v >= low);
        CHECK(v <= high);
      }
    }
  }
}

TEST_CASE("witnesses reproduce their violation") {
  std::mt19937_64 rng(23);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 2;
    const auto f = testgen::random_family(n, rng, true);
    const auto v2 = check_theorem2(f);
    if (v2.compatible) {
      CHECK_FALSE(v2.witness);
      continue;
    }
    ++violations;
    const auto& w = *v2.witness;
    CHECK(w.subset.size() % 2 == 1);
    const Rational value = odd_subset_sum(f, w.subset, w.x);
    CHECK(value == w.value);
    CHECK((value < 0 || value > 1));
  }
  CHECK(violations > 0);
}

TEST_CASE("derive") {
  const auto f = pairwise(ghz_joint());
  const auto empty = f.derive(SubsetMask());
  REQUIRE(empty);
  CHECK(empty->values().size() == 1);
  CHECK(empty->at_restriction(0) == 1);
  CHECK_FALSE(f.derive(SubsetMask::full(3)));
  CHECK(f.covers_all_proper_subsets());
  CHECK(f.is_pairwise_triple());
}
