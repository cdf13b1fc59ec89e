#pragma once

// Span-level primitives over (values, probs, order) triples. They accept zero
// probabilities, which the public DiscreteDistribution type does not, because
// worst-case weights routinely contain zeros.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace wcs::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Indices sorting `values` descending; ties keep ascending index order.
inline std::vector<std::size_t> descending_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/**
 * @brief Maximizes f'q over {q : lower*p <= q <= upper*p, sum q = 1} greedily.
 *
 * The floor lower*p is placed first, then the remaining mass fills atoms in
 * `order` up to their headroom (upper-lower)*p. `upper` may be infinite, in
 * which case the first atom in order absorbs everything left. Requires
 * lower*sum(p) <= 1 <= upper*sum(p).
 */
inline std::vector<double> box_greedy(std::span<const double> probs,
                                      std::span<const std::size_t> order, double lower,
                                      double upper) {
  const std::size_t n = probs.size();
  std::vector<double> q(n);
  double floor_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = lower * probs[i];
    floor_mass += q[i];
  }
  double remaining = 1.0 - floor_mass;
  std::size_t last = order.empty() ? 0 : order.front();
  for (std::size_t idx : order) {
    if (remaining <= 0.0) break;
    const double room = upper == kInf ? kInf : (upper - lower) * probs[idx];
    const double take = std::min(room, remaining);
    q[idx] += take;
    remaining -= take;
    last = idx;
  }
  // Rounding can leave a few ulps of unplaced mass; the last filled atom takes it.
  if (remaining > 0.0 && n > 0) q[last] += remaining;
  return q;
}

/// Greedy CVaR weights at level alpha: caps p/(1-alpha), filled in `order`.
inline std::vector<double> cvar_weights(std::span<const double> probs,
                                        std::span<const std::size_t> order, double alpha) {
  return box_greedy(probs, order, 0.0, 1.0 / (1.0 - alpha));
}

/// Absolute tolerance used when deciding whether a cumulative tail mass sits on 1-beta.
inline constexpr double kKnifeEdgeTol = 1e-12;

/// Number k of leading atoms (in order) whose cumulative mass is <= 1-beta.
inline std::size_t tail_count(std::span<const double> probs, std::span<const std::size_t> order,
                              double beta, double* cumulative_at_k = nullptr) {
  const double tail = 1.0 - beta;
  double cum = 0.0;
  std::size_t k = 0;
  for (std::size_t idx : order) {
    if (cum + probs[idx] > tail + kKnifeEdgeTol) break;
    cum += probs[idx];
    ++k;
  }
  if (cumulative_at_k != nullptr) *cumulative_at_k = cum;
  return k;
}

/// VaR with the f_(k+1) convention, clamped to the smallest atom.
inline double var_lower(std::span<const double> values, std::span<const double> probs,
                        std::span<const std::size_t> order, double beta) {
  const std::size_t k = tail_count(probs, order, beta);
  return values[order[std::min(k, order.size() - 1)]];
}

/// True when the cumulative tail mass of the leading k atoms equals 1-beta exactly
/// (up to kKnifeEdgeTol) for some k >= 1.
inline bool on_knife_edge(std::span<const double> probs, std::span<const std::size_t> order,
                          double beta) {
  double cum = 0.0;
  const std::size_t k = tail_count(probs, order, beta, &cum);
  return k >= 1 && std::abs(cum - (1.0 - beta)) <= kKnifeEdgeTol;
}

/**
 * @brief VaR as the right limit in the tail mass: f_(k) on the knife-edge, else f_(k+1).
 *
 * Robust-CVaR slopes at a degenerate level are right derivatives in the radius,
 * and those pick the larger of the two candidate quantiles.
 */
inline double var_upper(std::span<const double> values, std::span<const double> probs,
                        std::span<const std::size_t> order, double beta) {
  double cum = 0.0;
  const std::size_t k = tail_count(probs, order, beta, &cum);
  if (k >= 1 && std::abs(cum - (1.0 - beta)) <= kKnifeEdgeTol) return values[order[k - 1]];
  return values[order[std::min(k, order.size() - 1)]];
}

}  // namespace wcs::detail
