#pragma once

// Shared helpers for the test suites: seeded random instances and
// brute-force oracles that do not reuse library code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "wcs/core_dist.hpp"

namespace wcs::testing {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Random probability vector bounded away from zero.
inline std::vector<double> random_probs(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> p(n);
  double s = 0.0;
  for (double& x : p) {
    x = 0.05 + uniform01(rng);
    s += x;
  }
  for (double& x : p) x /= s;
  return p;
}

/// Values with occasional ties so tie handling gets exercised.
inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double scale = 10.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * (2.0 * uniform01(rng) - 1.0);
  if (n >= 3 && uniform01(rng) < 0.2) v[1] = v[0];
  return v;
}

inline DiscreteDistribution random_distribution(std::mt19937_64& rng, std::size_t n) {
  return {random_values(rng, n), random_probs(rng, n)};
}

/**
 * @brief max f'q over {sum q = 1, lo <= q <= hi} by enumerating basic solutions.
 *
 * Every vertex has all coordinates but one at a bound; the free one is fixed
 * by the sum constraint. Exponential in n, so only for small instances.
 */
inline double box_lp_bruteforce(const std::vector<double>& f, const std::vector<double>& lo,
                                const std::vector<double>& hi) {
  const std::size_t n = f.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t free = 0; free < n; ++free) {
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
      double mass = 0.0, obj = 0.0;
      std::size_t bit = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == free) continue;
        const double q = (mask >> bit++) & 1u ? hi[i] : lo[i];
        mass += q;
        obj += q * f[i];
      }
      const double qf = 1.0 - mass;
      if (qf < lo[free] - 1e-12 || qf > hi[free] + 1e-12) continue;
      best = std::max(best, obj + qf * f[free]);
    }
  }
  return best;
}

/// CVaR through its minimization form min_g g + E_q max(f-g, 0)/(1-beta), over g in f.
inline double cvar_by_minimization(const std::vector<double>& f, const std::vector<double>& q,
                                   double beta) {
  double best = std::numeric_limits<double>::infinity();
  for (double g : f) {
    double e = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) e += q[i] * std::max(f[i] - g, 0.0);
    best = std::min(best, g + e / (1.0 - beta));
  }
  return best;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace wcs::testing
