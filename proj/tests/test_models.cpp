#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "wcs/models.hpp"

using Catch::Approx;
using namespace wcs;

TEST_CASE("inventory cost", "[models]") {
  const InventoryParams p;
  CHECK(inventory_cost(p, 5.0, 5.0) == -40.0);
  for (double y : {0.0, 3.0, 17.5}) CHECK(inventory_cost(p, 0.0, y) == p.s * y);
  for (double x : {1.0, 8.0}) CHECK(inventory_cost(p, x, x) == (p.c - p.r) * x);
  const InventoryParams salvage{10.0, 2.0, 1.0, 4.0};
  CHECK(inventory_cost(salvage, 6.0, 2.0) == -20.0 - 4.0 + 12.0);
  CHECK_THROWS_AS((InventoryParams{10.0, 12.0, 0.0, 4.0}.validate()), DomainError);
  CHECK_THROWS_AS((InventoryParams{10.0, 2.0, 3.0, 4.0}.validate()), DomainError);
}

TEST_CASE("inventory cost is convex in the order", "[models][property]") {
  const InventoryParams p;
  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    const double y = 100.0 * testing::uniform01(rng);
    const double x = 100.0 * testing::uniform01(rng);
    const double h = 0.01 + testing::uniform01(rng);
    const double second = inventory_cost(p, x + h, y) - 2.0 * inventory_cost(p, x, y) + inventory_cost(p, x - h, y);
    CHECK(second >= -1e-9);
  }
}

TEST_CASE("inventory problem induces the cost distribution", "[models]") {
  const InventoryParams p;
  const auto prob = inventory_problem(p, {2.0, 4.0, 9.0}, std::vector<double>{0.2, 0.3, 0.5});
  const auto d0 = induced_cost_distribution(prob, 0.0);
  CHECK(d0.value(0) == 8.0);
  CHECK(d0.value(2) == 36.0);
  CHECK(d0.prob(2) == 0.5);
  CHECK(std::get<Interval>(prob.domain).hi == 13.5);
  CHECK_THROWS_AS(inventory_problem(p, {}), DomainError);
  CHECK_THROWS_AS(inventory_problem(p, {1.0, -1.0}), DomainError);
}

TEST_CASE("portfolio problem selects columns", "[models]") {
  ReturnsMatrix r{{"a", "b"}, {1.0, 2.0, -3.0, 4.0}, 2, 2};
  const auto prob = portfolio_problem(r, RiskLevel(0.9));
  const auto d = induced_cost_distribution(prob, std::vector<double>{1.0, 0.0});
  CHECK(d.value(0) == -1.0);
  CHECK(d.value(1) == 3.0);
  REQUIRE(prob.affine);
  CHECK(prob.affine->slope == std::vector<double>{-1.0, -2.0, 3.0, -4.0});
}

TEST_CASE("mixture demand sampler", "[models]") {
  const auto a = exp_mixture_demand(100, 10, 100, 0.9, 7);
  const auto b = exp_mixture_demand(100, 10, 100, 0.9, 7);
  const auto c = exp_mixture_demand(100, 10, 100, 0.9, 8);
  CHECK(a == b);
  CHECK(a != c);
  for (double y : a) CHECK(y > 0.0);
  CHECK(exp_mixture_demand(1, 10, 100, 0.9, 1).front() > 0.0);
  // Single exponential component: sample mean within 4 standard errors.
  const std::size_t n = 20000;
  const auto big = exp_mixture_demand(n, 10, 100, 1.0, 11);
  double m = 0.0;
  for (double y : big) m += y / static_cast<double>(n);
  CHECK(std::abs(m - 10.0) <= 4.0 * 10.0 / std::sqrt(static_cast<double>(n)));
  CHECK_THROWS_AS(exp_mixture_demand(0, 10, 100, 0.9, 1), DomainError);
  CHECK_THROWS_AS(exp_mixture_demand(5, -1, 100, 0.9, 1), DomainError);
}

TEST_CASE("returns CSV ingestion", "[models][csv]") {
  std::istringstream plain("A,B\n1.5,-2\n0.25,3\n-1,0\n");
  const auto r = read_returns_csv(plain);
  CHECK(r.n == 3);
  CHECK(r.d == 2);
  CHECK(r.names == std::vector<std::string>{"A", "B"});
  CHECK(r.at(1, 1) == 3.0);

  std::istringstream dated("Date,A,B\n192607,1.5,-2\n192608,0.25,3\n");
  const auto s = read_returns_csv(dated, 0.01);
  CHECK(s.d == 2);
  CHECK(s.at(0, 0) == Approx(0.015).epsilon(1e-15));

  std::istringstream header_only("A,B\n");
  CHECK_THROWS_AS(read_returns_csv(header_only), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_returns_csv(empty), ParseError);

  std::istringstream ragged("A,B\n1,2\n3\n");
  try {
    read_returns_csv(ragged);
    FAIL("ragged row accepted");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
  }
  std::istringstream bad("A,B\n1,2\n3,x\n");
  try {
    read_returns_csv(bad);
    FAIL("non-numeric cell accepted");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
  }
}

TEST_CASE("returns CSV round trip", "[models][csv]") {
  const auto r = synthetic_returns(25, 4, 9);
  std::stringstream buf;
  write_returns_csv(buf, r);
  const auto back = read_returns_csv(buf);
  CHECK(back.names == r.names);
  CHECK(back.data == r.data);
}

TEST_CASE("synthetic returns", "[models]") {
  const auto a = synthetic_returns(1000, 30, 7);
  CHECK(a.data == synthetic_returns(1000, 30, 7).data);
  CHECK(a.data != synthetic_returns(1000, 30, 8).data);
  // Losses of the equal-weight portfolio are right-skewed.
  std::vector<double> loss(a.n, 0.0);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = 0; j < a.d; ++j) loss[i] -= a.at(i, j) / static_cast<double>(a.d);
  const auto d = DiscreteDistribution::empirical(loss);
  double third = 0.0;
  for (double v : loss) third += std::pow(v - mean(d), 3) / static_cast<double>(a.n);
  CHECK(third / std::pow(stdev(d), 3) > 1.0);
}
