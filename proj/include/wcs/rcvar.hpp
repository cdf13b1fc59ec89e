#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wcs/core_dist.hpp"
#include "wcs/uncertainty.hpp"

namespace wcs {

/**
 * @brief Slope of the robust CVaR at eps = 0.
 *
 * Uses the tail excess t = max(f - VaR_beta, 0). When 1-beta sits exactly on a
 * cumulative tail mass the two candidate quantiles differ; the right derivative
 * in eps is attained at the larger one, which is what is used here, and the
 * result is flagged as degenerate.
 */
inline Sensitivity rcvar_sensitivity(const DiscreteDistribution& d, RiskLevel beta,
                                     const UncertaintySetSpec& spec) {
  if (std::holds_alternative<WassersteinBall>(spec))
    throw UnsupportedFamily("robust CVaR is not defined here for Wasserstein sets");
  Sensitivity out{0.0, growth_of(spec), var_is_degenerate(d, beta)};
  if (d.is_constant()) return out;
  const double tail = 1.0 - beta.value();
  const double v = detail::var_upper(d.values(), d.probs(), d.descending_order(), beta);
  if (std::holds_alternative<TotalVariation>(spec)) {
    out.value = (max_value(d) - v) / (2.0 * tail);
    return out;
  }
  if (std::holds_alternative<Budgeted>(spec)) {
    out.value = std::max(cvar(d, beta) - v, 0.0);
    return out;
  }
  std::vector<double> excess(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) excess[i] = std::max(d.value(i) - v, 0.0);
  const DiscreteDistribution t(std::move(excess), {d.probs().begin(), d.probs().end()});
  if (const auto* s = std::get_if<SmoothPhi>(&spec)) {
    out.value = std::sqrt(2.0 * variance(t) / s->phi_dd) / tail;
  } else if (const auto* cc = std::get_if<ConvexCombination>(&spec)) {
    out.value = cvar_deviation(t, cc->alpha) / tail;
  } else {
    out.value = cvar_deviation(t, RiskLevel(0.5)) / tail;
  }
  return out;
}

namespace detail {

/**
 * @brief Exact robust CVaR for polyhedral families by a one-dimensional reduction.
 *
 *   RCVaR = min_gamma gamma + V(eps; max(f - gamma, 0)) / (1 - beta),
 *
 * where V is the family's exact worst case. The objective is convex and
 * piecewise linear in gamma with kinks only at the values f_i, so a binary
 * search over the sorted distinct values finds the exact minimum. The
 * maximizing q comes from the worst case at the optimal gamma (greedy order
 * taken from f), and the tail measure Q is the CVaR greedy under q.
 */
inline WorstCaseResult polyhedral_rcvar(const DiscreteDistribution& d, double beta,
                                        const UncertaintySetSpec& spec, double eps) {
  const auto order = d.descending_order();
  const auto probs = d.probs();
  std::vector<double> levels;  // ascending distinct values
  for (std::size_t r = order.size(); r-- > 0;) {
    const double v = d.value(order[r]);
    if (levels.empty() || v != levels.back()) levels.push_back(v);
  }
  std::vector<double> g(d.size());
  const auto objective = [&](double gamma, WorstCaseResult* keep) {
    for (std::size_t i = 0; i < d.size(); ++i) g[i] = std::max(d.value(i) - gamma, 0.0);
    WorstCaseResult wc = worst_case_raw(g, probs, order, spec, eps, true);
    const double h = gamma + wc.value / (1.0 - beta);
    if (keep != nullptr) *keep = std::move(wc);
    return h;
  };
  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (objective(levels[mid], nullptr) < objective(levels[mid + 1], nullptr)) hi = mid;
    else lo = mid + 1;
  }
  const double gamma = levels[lo];
  WorstCaseResult inner;
  WorstCaseResult out;
  out.value = objective(gamma, &inner);
  out.weights = std::move(inner.weights);
  out.tail_weights = cvar_weights(std::span<const double>(out.weights), order, beta);
  out.dual = DualInfo{std::nullopt, std::nullopt, gamma, std::nullopt};
  out.saturated = inner.saturated;
  return out;
}

}  // namespace detail

/**
 * @brief Robust CVaR: max over q in the family's set of CVaR_{q,beta}(f).
 *
 * Exact for TV, Budgeted, ConvexComb and Symmetric. Smooth phi sets return
 * the first-order value CVaR + sqrt(eps) S, flagged approximate, with no
 * weights.
 */
inline WorstCaseResult rcvar_value(const DiscreteDistribution& d, RiskLevel beta,
                                   const UncertaintySetSpec& spec, double eps) {
  detail::check_radius(spec, eps);
  const bool degenerate = var_is_degenerate(d, beta);
  WorstCaseResult out;
  if (eps == 0.0 || d.is_constant()) {
    out.value = cvar(d, beta);
    out.weights.assign(d.probs().begin(), d.probs().end());
    out.tail_weights = cvar_weights(d, beta);
  } else if (const auto* s = std::get_if<SmoothPhi>(&spec)) {
    out.value = cvar(d, beta) + std::sqrt(eps) * rcvar_sensitivity(d, beta, *s).value;
    out.approximate = true;
  } else if (std::holds_alternative<Budgeted>(spec)) {
    // Inflating every cap by (1 + eps) is the same as CVaR at a deeper level.
    const double tail = (1.0 - beta.value()) / (1.0 + eps);
    out.value = cvar(d, RiskLevel(1.0 - tail));
    out.weights = cvar_weights(d, RiskLevel(detail::budgeted_level(eps)));
    out.tail_weights = detail::cvar_weights(std::span<const double>(out.weights), d.descending_order(), beta);
    out.dual = DualInfo{std::nullopt, std::nullopt, var_quantile(d, RiskLevel(1.0 - tail)), std::nullopt};
  } else {
    out = detail::polyhedral_rcvar(d, beta, spec, eps);
  }
  out.beta = beta.value();
  out.degenerate = degenerate;
  return out;
}

}  // namespace wcs
