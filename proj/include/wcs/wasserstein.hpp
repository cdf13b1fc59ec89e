#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "wcs/core_dist.hpp"
#include "wcs/errors.hpp"
#include "wcs/uncertainty.hpp"

namespace wcs {

/// Scalar scenario range; either end may be infinite.
struct IntervalDomain {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/**
 * Finite candidate points per atom. `origins[i]` is the location of atom i;
 * when empty, atom i sits at the scalar d.value(i).
 */
struct CandidateDomain {
  std::vector<std::vector<std::vector<double>>> candidates;
  std::vector<std::vector<double>> origins;
};

using ScenarioDomain = std::variant<IntervalDomain, CandidateDomain>;

/// f(x, z) with the scenario space it is defined on. Must be re-entrant.
struct CostOracle {
  std::function<double(std::span<const double> x, std::span<const double> z)> eval;
  ScenarioDomain domain = IntervalDomain{};
  Norm norm = Norm::Abs;
  /// Known value of the sensitivity; returned as-is with the grid kept as a cross-check.
  std::optional<double> analytic;
};

struct WassersteinSensitivity {
  double value = 0.0;
  std::size_t argmax_atom = 0;
  std::vector<double> argmax_point;
  double grid_value = 0.0;    // best difference quotient found numerically
  bool unbounded = false;     // quotient still growing at the edge of an unbounded interval
  bool analytic = false;
};

struct WassersteinOptions {
  std::size_t grid_points = 2001;
  double golden_tol = 1e-8;
  int probe_doublings = 40;
};

namespace detail {

inline double scenario_distance(std::span<const double> a, std::span<const double> b, Norm norm) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s = norm == Norm::Abs ? s + std::abs(d) : s + d * d;
  }
  return norm == Norm::Abs ? s : std::sqrt(s);
}

}  // namespace detail

/**
 * @brief Type-1 Wasserstein sensitivity: max over atoms i and points z != Y_i of
 * (f(x, z) - f(x, Y_i)) / |z - Y_i|.
 *
 * Interval domains use a uniform grid plus golden-section refinement of the
 * best cell, kept on the same side of Y_i. Infinite ends are explored by
 * doubling probes; if the quotient is still rising without slowing down at
 * the last probe the result is flagged unbounded.
 */
inline WassersteinSensitivity wasserstein_sensitivity(const DiscreteDistribution& d, const CostOracle& oracle,
                                                      std::span<const double> x,
                                                      const WassersteinOptions& opt = {}) {
  if (!oracle.eval) throw DomainError("cost oracle has no evaluation function");
  WassersteinSensitivity out;
  bool found = false;
  const auto consider = [&](double q, std::size_t atom, std::vector<double> z) {
    if (!std::isfinite(q)) return;
    if (!found || q > out.grid_value) {
      out.grid_value = q;
      out.argmax_atom = atom;
      out.argmax_point = std::move(z);
      found = true;
    }
  };

  if (const auto* cand = std::get_if<CandidateDomain>(&oracle.domain)) {
    if (cand->candidates.size() != d.size()) throw DomainError("need one candidate list per atom");
    if (!cand->origins.empty() && cand->origins.size() != d.size()) throw DomainError("need one origin per atom");
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::vector<double> y = cand->origins.empty() ? std::vector<double>{d.value(i)} : cand->origins[i];
      const double fy = oracle.eval(x, y);
      for (const auto& z : cand->candidates[i]) {
        if (z.size() != y.size()) throw DomainError("candidate point has the wrong dimension");
        const double dist = detail::scenario_distance(z, y, oracle.norm);
        if (dist == 0.0) continue;
        consider((oracle.eval(x, z) - fy) / dist, i, z);
      }
    }
    if (!found) throw DomainError("candidate grid is empty");
  } else {
    const auto& iv = std::get<IntervalDomain>(oracle.domain);
    if (!(iv.lo < iv.hi)) throw DomainError("scenario interval is empty");
    // Finite window: the domain itself, or the atoms' span padded on each unbounded side.
    const double ymin = min_value(d), ymax = max_value(d);
    const double pad = std::max(1.0, ymax - ymin);
    const double lo = std::isfinite(iv.lo) ? iv.lo : std::min(ymin, iv.hi) - pad;
    const double hi = std::isfinite(iv.hi) ? iv.hi : std::max(ymax, iv.lo) + pad;
    const std::size_t m = std::max<std::size_t>(opt.grid_points, 2);
    std::vector<double> grid(m), fgrid(m);
    for (std::size_t k = 0; k < m; ++k) {
      grid[k] = k + 1 == m ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m - 1);
      fgrid[k] = oracle.eval(x, std::span<const double>(&grid[k], 1));
    }
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = d.value(i);
      if (y < iv.lo || y > iv.hi) throw DomainError("atom lies outside the scenario interval");
      const double fy = oracle.eval(x, std::span<const double>(&y, 1));
      const auto quotient = [&](double z) {
        return (oracle.eval(x, std::span<const double>(&z, 1)) - fy) / std::abs(z - y);
      };
      std::size_t best_k = m;
      double best = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        if (grid[k] == y) continue;
        const double q = (fgrid[k] - fy) / std::abs(grid[k] - y);
        if (best_k == m || q > best) {
          best = q;
          best_k = k;
        }
      }
      if (best_k == m) continue;
      consider(best, i, {grid[best_k]});
      // Golden refinement on the best cell, clipped to the side of y it lies on.
      double a = best_k > 0 ? grid[best_k - 1] : grid[best_k];
      double b = best_k + 1 < m ? grid[best_k + 1] : grid[best_k];
      if (grid[best_k] > y) a = std::max(a, y);
      else b = std::min(b, y);
      double c = b - ratio * (b - a), e = a + ratio * (b - a);
      const auto safe = [&](double z) { return z == y ? -std::numeric_limits<double>::infinity() : quotient(z); };
      double fc = safe(c), fe = safe(e);
      while (b - a > opt.golden_tol) {
        if (fc >= fe) {
          b = e;
          e = c;
          fe = fc;
          c = b - ratio * (b - a);
          fc = safe(c);
        } else {
          a = c;
          c = e;
          fc = fe;
          e = a + ratio * (b - a);
          fe = safe(e);
        }
      }
      if (fc >= fe) consider(fc, i, {c});
      else consider(fe, i, {e});

      // Doubling probes along unbounded directions.
      for (int side : {-1, 1}) {
        if (side < 0 ? std::isfinite(iv.lo) : std::isfinite(iv.hi)) continue;
        // A Lipschitz cost makes the quotient converge, so its increments shrink
        // geometrically; superlinear growth keeps them from shrinking.
        std::vector<double> q;
        double dist = pad;
        for (int k = 0; k < opt.probe_doublings; ++k, dist *= 2.0) {
          const double z = y + side * dist;
          q.push_back(quotient(z));
          consider(q.back(), i, {z});
        }
        const std::size_t t = q.size();
        if (t >= 4) {
          const double d1 = q[t - 3] - q[t - 4], d2 = q[t - 2] - q[t - 3], d3 = q[t - 1] - q[t - 2];
          if (d1 > 0.0 && d2 >= 0.9 * d1 && d3 >= 0.9 * d2) out.unbounded = true;
        }
      }
    }
    if (!found) throw DomainError("candidate grid is empty");
  }
  out.value = out.grid_value;
  if (oracle.analytic) {
    out.value = *oracle.analytic;
    out.analytic = true;
  }
  return out;
}

/// First-order value mean f(x, Y) + eps * sensitivity; not a full Wasserstein DRO solve.
inline double wasserstein_value_first_order(const DiscreteDistribution& d, const CostOracle& oracle,
                                            std::span<const double> x, double eps,
                                            const WassersteinOptions& opt = {}) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("radius must be a finite nonnegative number");
  double m = 0.0;
  const auto* cand = std::get_if<CandidateDomain>(&oracle.domain);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::vector<double> y = cand != nullptr && !cand->origins.empty() ? cand->origins[i]
                                                                           : std::vector<double>{d.value(i)};
    m += d.prob(i) * oracle.eval(x, y);
  }
  if (eps == 0.0) return m;
  return m + eps * wasserstein_sensitivity(d, oracle, x, opt).value;
}

}  // namespace wcs
