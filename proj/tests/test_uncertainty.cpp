#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "wcs/uncertainty.hpp"

using Catch::Approx;
using namespace wcs;

namespace {

DiscreteDistribution uniform(std::vector<double> v) { return DiscreteDistribution::empirical(std::move(v)); }

std::vector<UncertaintySetSpec> all_families() {
  return {modified_chi2(), modified_chi2(2.5), kullback_leibler(), kullback_leibler(0.5),
          TotalVariation{},  Budgeted{},          ConvexCombination{RiskLevel(0.5)},
          ConvexCombination{RiskLevel(0.9)}, Symmetric{}};
}

double max_radius(const UncertaintySetSpec& s) {
  if (std::holds_alternative<TotalVariation>(s)) return 2.0;
  if (std::holds_alternative<ConvexCombination>(s) || std::holds_alternative<Symmetric>(s)) return 1.0;
  return 3.0;
}

double chi2_divergence(const std::vector<double>& q, std::span<const double> p) {
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) d += p[i] * 0.5 * (q[i] / p[i] - 1.0) * (q[i] / p[i] - 1.0);
  return d;
}

}  // namespace

TEST_CASE("sensitivity reference values", "[uncertainty]") {
  const auto d = uniform({1, 2, 3});
  const auto chi = sensitivity(d, modified_chi2());
  CHECK(chi.value == Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-14));
  CHECK(chi.growth == Growth::Sqrt);
  CHECK(sensitivity(d, TotalVariation{}).value == Approx(1.0));
  CHECK(sensitivity(d, TotalVariation{}).growth == Growth::Linear);
  CHECK(sensitivity(d, Budgeted{}).value == Approx(1.0));
  CHECK(sensitivity(d, ConvexCombination{RiskLevel(0.5)}).value == Approx(2.0 / 3.0).epsilon(1e-14));
  // CVaR_1/2 - mean: caps 2/3 on the two largest values.
  CHECK(sensitivity(d, Symmetric{}).value == Approx(2.0 / 3.0).epsilon(1e-14));
  for (const auto& s : all_families()) CHECK(sensitivity(uniform({4, 4, 4}), s).value == 0.0);
  CHECK_THROWS_AS(sensitivity(d, WassersteinBall{}), UnsupportedFamily);
}

TEST_CASE("worst-case reference values", "[uncertainty]") {
  SECTION("modified chi-square closed form") {
    const auto r = worst_case(uniform({1, 2, 3}), modified_chi2(), 0.12);
    CHECK(r.value == Approx(2.4).epsilon(1e-13));
    CHECK(r.weights[0] == Approx(0.4 / 3.0).epsilon(1e-12));
    CHECK(r.weights[1] == Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(r.weights[2] == Approx(1.6 / 3.0).epsilon(1e-12));
    CHECK(chi2_divergence(r.weights, uniform({1, 2, 3}).probs()) == Approx(0.12).epsilon(1e-12));
    REQUIRE(r.dual);
    CHECK(*r.dual->delta == Approx(std::sqrt(2 * 0.12 / (2.0 / 3.0))).epsilon(1e-12));
    CHECK(*r.dual->c == Approx(-2.0).epsilon(1e-12));
  }
  SECTION("total variation") {
    const auto r = worst_case(uniform({3, 2, 1}), TotalVariation{}, 0.2);
    CHECK(r.value == Approx(2.2).epsilon(1e-14));
    CHECK(r.weights[0] == Approx(1.0 / 3.0 + 0.1).epsilon(1e-14));
    CHECK(r.weights[1] == Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(r.weights[2] == Approx(1.0 / 3.0 - 0.1).epsilon(1e-14));
  }
  SECTION("budgeted and convex combination") {
    CHECK(worst_case(uniform({3, 2, 1}), Budgeted{}, 0.2).value == Approx(2.2).epsilon(1e-14));
    CHECK(worst_case(uniform({1, 2, 3}), ConvexCombination{RiskLevel(0.5)}, 0.3).value ==
          Approx(2.2).epsilon(1e-14));
  }
  SECTION("zero radius returns the nominal model") {
    const DiscreteDistribution d({5, -1, 2}, {0.2, 0.5, 0.3});
    for (const auto& s : all_families()) {
      const auto r = worst_case(d, s, 0.0);
      CHECK(r.value == Approx(mean(d)).epsilon(1e-15));
      for (std::size_t i = 0; i < d.size(); ++i) CHECK(r.weights[i] == d.prob(i));
    }
  }
}

TEST_CASE("worst-case domain checks", "[uncertainty]") {
  const auto d = uniform({1, 2, 3});
  CHECK_THROWS_AS(worst_case(d, ConvexCombination{RiskLevel(0.5)}, 1.01), DomainError);
  CHECK_THROWS_AS(worst_case(d, Symmetric{}, 1.5), DomainError);
  CHECK_THROWS_AS(worst_case(d, TotalVariation{}, 2.5), DomainError);
  CHECK_THROWS_AS(worst_case(d, Budgeted{}, -0.1), DomainError);
  CHECK_THROWS_AS(worst_case(d, WassersteinBall{}, 0.1), UnsupportedFamily);
  CHECK_THROWS_AS(modified_chi2(0.0), DomainError);
}

TEST_CASE("saturation at large radii", "[uncertainty]") {
  const DiscreteDistribution d({1, 4, 4, 2}, {0.4, 0.1, 0.2, 0.3});
  for (const auto& s : all_families()) {
    const auto r = worst_case(d, s, max_radius(s));
    // At eps = 1 the convex-combination set is the CVaR set, not the whole simplex.
    const auto* cc = std::get_if<ConvexCombination>(&s);
    CHECK(r.value == Approx(cc ? cvar(d, cc->alpha) : 4.0).epsilon(1e-12));
  }
  // Tied maxima share the mass in proportion to p.
  const auto tv = worst_case(d, TotalVariation{}, 2.0);
  CHECK(tv.weights[1] + tv.weights[2] == Approx(1.0));
  const auto chi = worst_case(d, modified_chi2(), 10.0);
  CHECK(chi.weights[1] == Approx(1.0 / 3.0));
  CHECK(chi.weights[2] == Approx(2.0 / 3.0));
}

TEST_CASE("penalty sensitivity", "[uncertainty]") {
  CHECK(penalty_sensitivity(uniform({1, 2, 3}), modified_chi2()) == Approx(2.0 / 3.0));
  CHECK(penalty_sensitivity(uniform({5, 5}), modified_chi2()) == 0.0);
  CHECK(penalty_sensitivity(uniform({0, 2}), modified_chi2(2.0)) == Approx(0.5));
  CHECK_THROWS_AS(penalty_sensitivity(uniform({0, 2}), TotalVariation{}), UnsupportedFamily);
}

TEST_CASE("finite-difference slopes", "[uncertainty]") {
  const std::vector<double> grid{0.01, 0.05, 0.1, 0.3};
  for (const auto& [eps, slope] : finite_difference_slope(uniform({1, 2, 3}), ConvexCombination{RiskLevel(0.5)}, grid))
    CHECK(slope == Approx(2.0 / 3.0).epsilon(1e-12));
  for (const auto& [eps, slope] : finite_difference_slope(uniform({1, 2, 3}), modified_chi2(), grid))
    CHECK(slope == Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
  const std::vector<double> small{0.05, 0.2, 0.45};
  for (const auto& [eps, slope] : finite_difference_slope(uniform({3, 2, 1}), Budgeted{}, small))
    CHECK(slope == Approx(1.0).epsilon(1e-12));
  const std::vector<double> bad{0.1, 0.05};
  CHECK_THROWS_AS(finite_difference_slope(uniform({1, 2}), Budgeted{}, bad), DomainError);
}

TEST_CASE("deviation axioms", "[uncertainty][property]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const auto f = testing::random_values(rng, n);
    const auto p = testing::random_probs(rng, n);
    const double scale = 3.0 * testing::uniform01(rng);
    const double shift = 20.0 * testing::uniform01(rng) - 10.0;
    std::vector<double> fs(n), ft(n);
    for (std::size_t i = 0; i < n; ++i) {
      fs[i] = scale * f[i];
      ft[i] = f[i] + shift;
    }
    const DiscreteDistribution d(f, p), ds(fs, p), dt(ft, p);
    for (const auto& s : all_families()) {
      const double base = sensitivity(d, s).value;
      CHECK(base >= 0.0);
      CHECK(testing::rel_err(sensitivity(ds, s).value, scale * base) <= 1e-9);
      CHECK(testing::rel_err(sensitivity(dt, s).value, base) <= 1e-9);
      CHECK((base == 0.0) == d.is_constant());
    }
  }
}

TEST_CASE("worst-case value is monotone and concave in the radius", "[uncertainty][property]") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const auto d = testing::random_distribution(rng, 2 + rng() % 9);
    for (const auto& s : all_families()) {
      const double top = max_radius(s);
      std::vector<double> v;
      for (int k = 0; k <= 40; ++k) v.push_back(worst_case(d, s, top * k / 40.0).value);
      for (std::size_t k = 1; k < v.size(); ++k) CHECK(v[k] >= v[k - 1] - 1e-12);
      // The symmetric set's upper cap 1/(1-eps) is convex in eps, so only monotonicity is claimed there.
      if (std::holds_alternative<Symmetric>(s)) continue;
      for (std::size_t k = 2; k < v.size(); ++k) CHECK(v[k] - 2 * v[k - 1] + v[k - 2] <= 1e-9);
    }
  }
}

TEST_CASE("result invariants and box bounds", "[uncertainty][property]") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = testing::random_distribution(rng, 1 + rng() % 15);
    for (const auto& s : all_families()) {
      const double eps = max_radius(s) * testing::uniform01(rng);
      const auto r = worst_case(d, s, eps);
      double total = 0.0, value = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(r.weights[i] >= 0.0);
        total += r.weights[i];
        value += r.weights[i] * d.value(i);
      }
      CHECK(total == Approx(1.0).margin(1e-9));
      CHECK(r.value == Approx(value).margin(1e-9));
      if (std::holds_alternative<Budgeted>(s)) {
        CHECK(r.value == cvar(d, RiskLevel(eps / (1 + eps))));
        for (std::size_t i = 0; i < d.size(); ++i) CHECK(r.weights[i] <= (1 + eps) * d.prob(i) + 1e-12);
      }
      if (const auto* cc = std::get_if<ConvexCombination>(&s)) {
        for (std::size_t i = 0; i < d.size(); ++i) {
          CHECK(r.weights[i] >= (1 - eps) * d.prob(i) - 1e-12);
          CHECK(r.weights[i] <= (1 - eps) * d.prob(i) + eps * d.prob(i) / (1 - cc->alpha.value()) + 1e-12);
        }
      }
      if (std::holds_alternative<TotalVariation>(s)) {
        double tv = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) tv += std::abs(r.weights[i] - d.prob(i));
        CHECK(tv <= eps + 1e-12);
      }
    }
  }
}

TEST_CASE("small instances agree with a simplex search oracle", "[uncertainty][oracle]") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 2 + rng() % 3;
    const auto d = testing::random_distribution(rng, n);
    const std::vector<double> f(d.values().begin(), d.values().end());
    const std::vector<double> p(d.probs().begin(), d.probs().end());
    const double eps = 0.4 * testing::uniform01(rng);
    const auto objective = [&](const std::vector<double>& q) { return testing::dot(f, q); };
    const auto tv_ok = [&](const std::vector<double>& q) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::abs(q[i] - p[i]);
      return s <= eps;
    };
    const auto chi_ok = [&](const std::vector<double>& q) { return chi2_divergence(q, p) <= eps; };
    const auto tv = testing::simplex_search(n, tv_ok, objective, {}, {p});
    const auto chi = testing::simplex_search(n, chi_ok, objective, {}, {p});
    CHECK(worst_case(d, TotalVariation{}, eps).value == Approx(tv.best).margin(2e-3));
    CHECK(worst_case(d, TotalVariation{}, eps).value >= tv.best - 1e-9);
    CHECK(worst_case(d, modified_chi2(), eps).value == Approx(chi.best).margin(2e-3));
    CHECK(worst_case(d, modified_chi2(), eps).value >= chi.best - 1e-9);
  }
}
