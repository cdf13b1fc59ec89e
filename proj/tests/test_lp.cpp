#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "support.hpp"
#include "wcs/detail/lp.hpp"

using Catch::Approx;
using wcs::detail::LinearProgram;
using wcs::detail::solve_lp;

namespace {

// Solves the square system M z = r by Gaussian elimination; nullopt if singular.
std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m, std::vector<double> r) {
  const std::size_t n = r.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
    if (std::abs(m[piv][k]) < 1e-10) return std::nullopt;
    std::swap(m[k], m[piv]);
    std::swap(r[k], r[piv]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = m[i][k] / m[k][k];
      for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
      r[i] -= f * r[k];
    }
  }
  for (std::size_t k = 0; k < n; ++k) r[k] /= m[k][k];
  return r;
}

// Vertex enumeration for a bounded LP: every basic solution is the
// intersection of n active hyperplanes drawn from rows and variable bounds.
std::optional<double> vertex_enumeration(const LinearProgram& lp) {
  const std::size_t n = lp.cols;
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  std::vector<std::size_t> required;
  for (std::size_t r = 0; r < lp.rows; ++r) {
    if (lp.equality[r]) required.push_back(planes.size());
    planes.push_back({{lp.a.begin() + static_cast<long>(r * n), lp.a.begin() + static_cast<long>((r + 1) * n)}, lp.rhs[r]});
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    planes.push_back({e, lp.lower[j]});
    planes.push_back({e, lp.upper[j]});
  }
  const auto feasible = [&](const std::vector<double>& z) {
    for (std::size_t r = 0; r < lp.rows; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += lp.a[r * n + j] * z[j];
      if (lp.equality[r] ? std::abs(s - lp.rhs[r]) > 1e-9 : s > lp.rhs[r] + 1e-9) return false;
    }
    for (std::size_t j = 0; j < n; ++j)
      if (z[j] < lp.lower[j] - 1e-9 || z[j] > lp.upper[j] + 1e-9) return false;
    return true;
  };
  std::optional<double> best;
  std::vector<std::size_t> pick;
  const auto recurse = [&](auto&& self, std::size_t start) -> void {
    if (pick.size() == n) {
      for (std::size_t req : required)
        if (std::find(pick.begin(), pick.end(), req) == pick.end()) return;
      std::vector<std::vector<double>> m;
      std::vector<double> r;
      for (std::size_t k : pick) {
        m.push_back(planes[k].a);
        r.push_back(planes[k].b);
      }
      const auto z = solve_square(m, r);
      if (!z || !feasible(*z)) return;
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v += lp.objective[j] * (*z)[j];
      if (!best || v > *best) best = v;
      return;
    }
    for (std::size_t k = start; k < planes.size(); ++k) {
      pick.push_back(k);
      self(self, k + 1);
      pick.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

// max_Q min_j (M'Q)_j over the simplex, written as an LP in (t, Q).
LinearProgram game(const std::vector<std::vector<double>>& m) {
  const std::size_t k = m.size();
  const std::size_t d = m.front().size();
  double lo = 0.0, hi = 0.0;
  for (const auto& row : m)
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  LinearProgram lp(d + 1, k + 1);
  lp.lower[0] = lo - 1.0;
  lp.upper[0] = hi + 1.0;
  lp.objective[0] = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    lp.at(j, 0) = 1.0;
    for (std::size_t i = 0; i < k; ++i) lp.at(j, i + 1) = -m[i][j];
  }
  for (std::size_t i = 0; i < k; ++i) lp.at(d, i + 1) = 1.0;
  lp.equality[d] = true;
  lp.rhs[d] = 1.0;
  return lp;
}

}  // namespace

TEST_CASE("simplex matches vertex enumeration on small bounded programs", "[lp]") {
  std::mt19937_64 rng(41);
  int solved = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 4;
    const std::size_t m = 1 + rng() % 3;
    LinearProgram lp(m, n);
    for (std::size_t j = 0; j < n; ++j) {
      lp.lower[j] = -2.0 + 2.0 * wcs::testing::uniform01(rng);
      lp.upper[j] = lp.lower[j] + 3.0 * wcs::testing::uniform01(rng);
      lp.objective[j] = 2.0 * wcs::testing::uniform01(rng) - 1.0;
    }
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < n; ++j) lp.at(r, j) = std::round(4.0 * wcs::testing::uniform01(rng) - 2.0);
      lp.rhs[r] = 2.0 * wcs::testing::uniform01(rng) - 1.0;
      lp.equality[r] = rng() % 4 == 0;
    }
    const auto oracle = vertex_enumeration(lp);
    if (!oracle) {
      CHECK_THROWS_AS(solve_lp(lp), wcs::DomainError);
      ++infeasible;
      continue;
    }
    const auto sol = solve_lp(lp);
    CHECK(sol.objective == Approx(*oracle).margin(1e-9));
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(sol.z[j] >= lp.lower[j] - 1e-9);
      CHECK(sol.z[j] <= lp.upper[j] + 1e-9);
    }
    for (std::size_t r = 0; r < m; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += lp.a[r * n + j] * sol.z[j];
      if (lp.equality[r]) CHECK(s == Approx(lp.rhs[r]).margin(1e-9));
      else CHECK(s <= lp.rhs[r] + 1e-9);
      if (!lp.equality[r]) CHECK(sol.duals[r] >= -1e-9);
    }
    ++solved;
  }
  CHECK(solved > 100);
  CHECK(infeasible > 0);
}

TEST_CASE("row duals of a matrix game are the minimizer's optimal strategy", "[lp]") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 2 + rng() % (trial < 50 ? 8 : 400);
    const std::size_t d = 2 + rng() % (trial < 50 ? 5 : 30);
    std::vector<std::vector<double>> m(k, std::vector<double>(d));
    for (auto& row : m)
      for (double& v : row) v = 10.0 * wcs::testing::uniform01(rng) - 5.0;
    const auto lp = game(m);
    const auto sol = solve_lp(lp);
    std::vector<double> x(sol.duals.begin(), sol.duals.begin() + static_cast<long>(d));
    double total = 0.0;
    for (double v : x) {
      CHECK(v >= -1e-9);
      total += v;
    }
    CHECK(total == Approx(1.0).margin(1e-9));
    // Value of the game from both sides.
    double row_best = -1e300;
    for (const auto& row : m) row_best = std::max(row_best, wcs::testing::dot(row, x));
    double col_best = 1e300;
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += m[i][j] * sol.z[i + 1];
      col_best = std::min(col_best, s);
    }
    CHECK(row_best == Approx(sol.objective).margin(1e-9));
    CHECK(col_best == Approx(sol.objective).margin(1e-9));
  }
}

TEST_CASE("unbounded programs are reported", "[lp]") {
  LinearProgram lp(1, 2);
  lp.objective = {1.0, 0.0};
  lp.at(0, 0) = 1.0;
  lp.at(0, 1) = -1.0;
  lp.rhs[0] = 1.0;
  CHECK_THROWS_AS(solve_lp(lp), wcs::DomainError);
}
