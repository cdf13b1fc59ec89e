#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wcs/core_dist.hpp"
#include "wcs/detail/smooth_phi.hpp"
#include "wcs/detail/sorted.hpp"
#include "wcs/errors.hpp"

namespace wcs {

/// How V(eps) - V(0) scales for small eps: like sqrt(eps) or like eps.
enum class Growth { Sqrt, Linear };

enum class PhiKind { ModifiedChi2, KL, Custom };

using ConjugatePhi = detail::ConjugatePhi;

/**
 * @brief Smooth phi-divergence ball {q : sum p phi(q/p) <= eps}.
 *
 * For ModifiedChi2 and KL the base function is scaled so that phi''(1) equals
 * `phi_dd`; scaling phi by k is the same as shrinking the radius to eps/k.
 * Custom sets describe phi through its convex conjugate, and `phi_dd` must
 * match the supplied function.
 */
struct SmoothPhi {
  PhiKind kind = PhiKind::ModifiedChi2;
  double phi_dd = 1.0;
  std::shared_ptr<const ConjugatePhi> custom;
};

/// {q : sum |q - p| <= eps}, eps in [0, 2].
struct TotalVariation {};
/// {q : 0 <= q <= (1 + eps) p}.
struct Budgeted {};
/// {(1 - eps) p + eps Q : Q <= p / (1 - alpha)}, eps in [0, 1].
struct ConvexCombination {
  RiskLevel alpha;
};
/// {q : (1 - eps) p <= q <= p / (1 - eps)}, eps in [0, 1].
struct Symmetric {};

enum class Norm { Abs, L2 };
/// Type-1 Wasserstein ball; handled by the wasserstein module only.
struct WassersteinBall {
  Norm norm = Norm::Abs;
};

using UncertaintySetSpec =
    std::variant<SmoothPhi, TotalVariation, Budgeted, ConvexCombination, Symmetric, WassersteinBall>;

inline SmoothPhi modified_chi2(double phi_dd = 1.0) {
  if (!(phi_dd > 0.0)) throw DomainError("phi''(1) must be positive");
  return {PhiKind::ModifiedChi2, phi_dd, nullptr};
}

inline SmoothPhi kullback_leibler(double phi_dd = 1.0) {
  if (!(phi_dd > 0.0)) throw DomainError("phi''(1) must be positive");
  return {PhiKind::KL, phi_dd, nullptr};
}

inline SmoothPhi custom_phi(ConjugatePhi fn, double phi_dd) {
  if (!(phi_dd > 0.0)) throw DomainError("phi''(1) must be positive");
  if (!fn.conj || !fn.conj_d1 || !fn.conj_d2)
    throw DomainError("custom phi needs phi*, phi*' and phi*''");
  return {PhiKind::Custom, phi_dd, std::make_shared<const ConjugatePhi>(std::move(fn))};
}

/// Short stable identifier used in reports and CSV headers.
inline std::string family_name(const UncertaintySetSpec& spec) {
  struct Visitor {
    std::string operator()(const SmoothPhi& s) const {
      switch (s.kind) {
        case PhiKind::ModifiedChi2: return "chi2";
        case PhiKind::KL: return "kl";
        case PhiKind::Custom: return "custom";
      }
      return "phi";
    }
    std::string operator()(const TotalVariation&) const { return "tv"; }
    std::string operator()(const Budgeted&) const { return "budgeted"; }
    std::string operator()(const ConvexCombination&) const { return "cc"; }
    std::string operator()(const Symmetric&) const { return "symmetric"; }
    std::string operator()(const WassersteinBall&) const { return "wasserstein"; }
  };
  return std::visit(Visitor{}, spec);
}

inline Growth growth_of(const UncertaintySetSpec& spec) {
  return std::holds_alternative<SmoothPhi>(spec) ? Growth::Sqrt : Growth::Linear;
}

inline double growth_function(Growth g, double eps) {
  return g == Growth::Sqrt ? std::sqrt(eps) : eps;
}

inline const char* growth_name(Growth g) { return g == Growth::Sqrt ? "sqrt" : "linear"; }

struct Sensitivity {
  double value = 0.0;
  Growth growth = Growth::Linear;
  bool degenerate = false;  // robust-CVaR only: VaR level sits on a knife-edge
};

/// Optional solver by-products. delta and c parameterize smooth-phi weights,
/// gamma is the VaR level selected by a robust-CVaR solve.
struct DualInfo {
  std::optional<double> delta;
  std::optional<double> c;
  std::optional<double> gamma;
  std::optional<double> lambda;
};

struct WorstCaseResult {
  double value = 0.0;
  std::vector<double> weights;       // q over the nominal atoms; empty if not produced
  std::vector<double> tail_weights;  // robust CVaR: maximizing tail measure Q
  std::optional<DualInfo> dual;
  std::optional<double> beta;
  bool approximate = false;
  bool saturated = false;   // eps beyond the radius where a point mass on max(f) is reachable
  bool degenerate = false;  // robust CVaR at a knife-edge level
};

namespace detail {

inline void check_radius(const UncertaintySetSpec& spec, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw DomainError("radius must be a finite nonnegative number");
  if (std::holds_alternative<WassersteinBall>(spec))
    throw UnsupportedFamily("Wasserstein sets are handled by the wasserstein module");
  if ((std::holds_alternative<ConvexCombination>(spec) || std::holds_alternative<Symmetric>(spec)) &&
      eps > 1.0)
    throw DomainError(family_name(spec) + " radius must lie in [0, 1]");
  if (std::holds_alternative<TotalVariation>(spec) && eps > 2.0)
    throw DomainError("tv radius must lie in [0, 2]");
}

/// Clamps tiny negative weights, then checks the result invariants.
inline void finalize_weights(std::vector<double>& q) {
  double total = 0.0;
  for (double& w : q) {
    if (w < 0.0) {
      if (w < -1e-12) throw ConvergenceError("worst-case weight is negative", w);
      w = 0.0;
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConvergenceError("worst-case weights do not sum to 1", total - 1.0);
}

/// Drains eps/2 from the bottom of `order` onto its first atom.
inline std::vector<double> tv_weights(std::span<const double> probs,
                                      std::span<const std::size_t> order, double eps) {
  std::vector<double> q(probs.begin(), probs.end());
  const std::size_t top = order.front();
  const double move = std::min(0.5 * eps, 1.0 - q[top]);
  q[top] += move;
  double remaining = move;
  for (std::size_t r = order.size(); r-- > 1 && remaining > 0.0;) {
    const std::size_t idx = order[r];
    const double take = std::min(remaining, q[idx]);
    q[idx] -= take;
    remaining -= take;
  }
  return q;
}

inline double budgeted_level(double eps) {
  const double alpha = eps / (1.0 + eps);
  return alpha < 1.0 ? alpha : std::nextafter(1.0, 0.0);
}

/**
 * @brief Worst case over raw (values, probs, order); probs may contain zeros.
 *
 * `order` must sort `values` descending. Ties in `order` decide which atoms the
 * greedy families fill first, which the robust-CVaR module relies on; with
 * `greedy_on_ties` the greedy runs even when all values are equal.
 */
inline WorstCaseResult worst_case_raw(std::span<const double> values, std::span<const double> probs,
                                      std::span<const std::size_t> order,
                                      const UncertaintySetSpec& spec, double eps,
                                      bool greedy_on_ties = false) {
  check_radius(spec, eps);
  WorstCaseResult out;
  const bool constant = values[order.front()] == values[order.back()];
  const bool shortcut = constant && !(greedy_on_ties && !std::holds_alternative<SmoothPhi>(spec));
  if (eps == 0.0 || shortcut) {
    out.weights.assign(probs.begin(), probs.end());
    out.value = constant ? values[order.front()] : dot(values, probs);
    if (std::holds_alternative<SmoothPhi>(spec))
      out.dual = DualInfo{0.0, -out.value, std::nullopt, std::nullopt};
    return out;
  }

  if (const auto* s = std::get_if<SmoothPhi>(&spec)) {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m += probs[i] * values[i];
    double var = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) var += probs[i] * (values[i] - m) * (values[i] - m);
    SmoothSolution sol;
    double scale = 1.0;
    switch (s->kind) {
      case PhiKind::ModifiedChi2:
        sol = chi2_worst_case(values, probs, order, eps / s->phi_dd);
        scale = s->phi_dd;
        break;
      case PhiKind::KL:
        sol = kl_worst_case(values, probs, order, eps / s->phi_dd, var);
        scale = s->phi_dd;
        break;
      case PhiKind::Custom:
        if (!s->custom) throw DomainError("custom phi set has no conjugate functions");
        sol = conjugate_newton(values, probs, order, eps, *s->custom, s->phi_dd, m, var);
        break;
    }
    out.weights = std::move(sol.weights);
    out.saturated = sol.saturated;
    out.dual = DualInfo{sol.delta * scale, sol.c, std::nullopt, std::nullopt};
  } else if (std::holds_alternative<TotalVariation>(spec)) {
    out.weights = tv_weights(probs, order, eps);
    out.saturated = eps >= 2.0;
  } else if (std::holds_alternative<Budgeted>(spec)) {
    out.weights = cvar_weights(probs, order, budgeted_level(eps));
  } else if (const auto* cc = std::get_if<ConvexCombination>(&spec)) {
    out.weights = box_greedy(probs, order, 1.0 - eps, 1.0 - eps + eps / (1.0 - cc->alpha.value()));
  } else if (std::holds_alternative<Symmetric>(spec)) {
    out.weights = box_greedy(probs, order, 1.0 - eps, eps < 1.0 ? 1.0 / (1.0 - eps) : kInf);
    out.saturated = eps >= 1.0;
  }
  finalize_weights(out.weights);
  out.value = dot(values, out.weights);
  return out;
}

}  // namespace detail

/**
 * @brief Worst-case sensitivity of the mean: the slope of V at eps = 0 on the
 * family's growth scale.
 */
inline Sensitivity sensitivity(const DiscreteDistribution& d, const UncertaintySetSpec& spec) {
  if (std::holds_alternative<WassersteinBall>(spec))
    throw UnsupportedFamily("Wasserstein sensitivity needs a cost oracle; use the wasserstein module");
  if (d.is_constant()) return {0.0, growth_of(spec)};
  if (const auto* s = std::get_if<SmoothPhi>(&spec))
    return {std::sqrt(2.0 * variance(d) / s->phi_dd), Growth::Sqrt};
  if (std::holds_alternative<TotalVariation>(spec)) return {0.5 * range(d), Growth::Linear};
  if (std::holds_alternative<Budgeted>(spec)) return {mean(d) - min_value(d), Growth::Linear};
  if (const auto* cc = std::get_if<ConvexCombination>(&spec))
    return {cvar_deviation(d, cc->alpha), Growth::Linear};
  return {cvar_deviation(d, RiskLevel(0.5)), Growth::Linear};
}

/// Worst-case expected cost V(eps) and a maximizing distribution over the atoms of d.
inline WorstCaseResult worst_case(const DiscreteDistribution& d, const UncertaintySetSpec& spec,
                                  double eps) {
  if (std::holds_alternative<Budgeted>(spec)) {
    detail::check_radius(spec, eps);
    const RiskLevel level(detail::budgeted_level(eps));
    WorstCaseResult out;
    out.weights = eps == 0.0 ? std::vector<double>(d.probs().begin(), d.probs().end())
                             : cvar_weights(d, level);
    out.value = cvar(d, level);
    return out;
  }
  return detail::worst_case_raw(d.values(), d.probs(), d.descending_order(), spec, eps);
}

/// Penalty-form sensitivity Var(f) / phi''(1); smooth families only.
inline double penalty_sensitivity(const DiscreteDistribution& d, const UncertaintySetSpec& spec) {
  const auto* s = std::get_if<SmoothPhi>(&spec);
  if (s == nullptr) throw UnsupportedFamily("penalty sensitivity is defined for smooth phi sets only");
  return variance(d) / s->phi_dd;
}

/// (eps, (V(eps) - V(0)) / g(eps)) for each eps in a strictly increasing positive grid.
inline std::vector<std::pair<double, double>> finite_difference_slope(
    const DiscreteDistribution& d, const UncertaintySetSpec& spec, std::span<const double> eps_grid) {
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0)) throw DomainError("eps grid must be strictly positive");
    if (i > 0 && !(eps_grid[i] > eps_grid[i - 1])) throw DomainError("eps grid must be increasing");
  }
  const double v0 = worst_case(d, spec, 0.0).value;
  const Growth g = growth_of(spec);
  std::vector<std::pair<double, double>> out;
  out.reserve(eps_grid.size());
  for (double eps : eps_grid)
    out.emplace_back(eps, (worst_case(d, spec, eps).value - v0) / growth_function(g, eps));
  return out;
}

}  // namespace wcs
