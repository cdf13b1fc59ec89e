#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wcs/core_dist.hpp"
#include "wcs/detail/lp.hpp"
#include "wcs/errors.hpp"
#include "wcs/rcvar.hpp"
#include "wcs/uncertainty.hpp"

namespace wcs {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};
/// Probability simplex {x >= 0, sum x = 1} in `dim` coordinates.
struct Simplex {
  std::size_t dim = 1;
};
using DecisionDomain = std::variant<Interval, Simplex>;

struct MeanObjective {};
struct CVaRObjective {
  RiskLevel beta;
};
using Objective = std::variant<MeanObjective, CVaRObjective>;

using CostFunction = std::function<double(std::span<const double> x, std::span<const double> y)>;

/// cost(x, Y_i) = intercept[i] + sum_j slope[i * dim + j] x_j.
struct AffineCost {
  std::vector<double> intercept;
  std::vector<double> slope;
  std::size_t dim = 0;
};

/**
 * @brief Scenarios Y_i with probabilities, a cost f(x, Y_i), and a decision domain.
 *
 * Simplex problems must also carry `affine`; the simplex solvers work on the
 * affine coefficients directly.
 */
struct DecisionProblem {
  std::vector<std::vector<double>> scenarios;
  std::vector<double> probs;
  CostFunction cost;
  DecisionDomain domain;
  Objective objective = MeanObjective{};
  std::optional<AffineCost> affine;
};

inline void validate(const DecisionProblem& prob) {
  if (prob.scenarios.size() != prob.probs.size())
    throw DomainError("each scenario needs exactly one probability");
  (void)DiscreteDistribution(std::vector<double>(prob.probs.size(), 0.0), prob.probs);
  if (!prob.cost) throw DomainError("decision problem has no cost function");
  if (const auto* iv = std::get_if<Interval>(&prob.domain)) {
    if (!(std::isfinite(iv->lo) && std::isfinite(iv->hi) && iv->lo < iv->hi))
      throw DomainError("decision interval needs finite lo < hi");
  } else {
    const std::size_t dim = std::get<Simplex>(prob.domain).dim;
    if (dim == 0) throw DomainError("simplex dimension must be positive");
    if (prob.affine) {
      if (prob.affine->dim != dim || prob.affine->intercept.size() != prob.scenarios.size() ||
          prob.affine->slope.size() != prob.scenarios.size() * dim)
        throw DomainError("affine cost coefficients do not match the problem size");
    }
  }
}

inline std::size_t decision_dim(const DecisionProblem& prob) {
  if (std::holds_alternative<Interval>(prob.domain)) return 1;
  return std::get<Simplex>(prob.domain).dim;
}

/// Cost distribution of the decision x: values f(x, Y_i) with the scenario probabilities.
inline DiscreteDistribution induced_cost_distribution(const DecisionProblem& prob, std::span<const double> x) {
  if (x.size() != decision_dim(prob)) throw DomainError("decision has the wrong dimension");
  if (const auto* iv = std::get_if<Interval>(&prob.domain)) {
    if (!(x[0] >= iv->lo && x[0] <= iv->hi)) throw DomainError("decision lies outside the interval");
  } else {
    double total = 0.0;
    for (double v : x) {
      if (!(v >= -1e-12)) throw DomainError("simplex decision has a negative weight");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("simplex decision does not sum to 1");
  }
  std::vector<double> costs(prob.scenarios.size());
  for (std::size_t i = 0; i < costs.size(); ++i) costs[i] = prob.cost(x, prob.scenarios[i]);
  return {std::move(costs), prob.probs};
}

inline DiscreteDistribution induced_cost_distribution(const DecisionProblem& prob, double x) {
  return induced_cost_distribution(prob, std::span<const double>(&x, 1));
}

/// V(eps) of the objective: worst-case mean, or robust CVaR.
inline WorstCaseResult robust_objective(const DiscreteDistribution& d, const Objective& obj,
                                        const UncertaintySetSpec& spec, double eps) {
  if (const auto* c = std::get_if<CVaRObjective>(&obj)) return rcvar_value(d, c->beta, spec, eps);
  return worst_case(d, spec, eps);
}

/// Nominal objective: mean or CVaR of the induced cost.
inline double nominal_objective(const DiscreteDistribution& d, const Objective& obj) {
  if (const auto* c = std::get_if<CVaRObjective>(&obj)) return cvar(d, c->beta);
  return mean(d);
}

struct ScalarSolution {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/**
 * @brief min over x in an interval of V(eps; f(x, .)).
 *
 * Evaluates a uniform grid of `grid_size` points (ties go to the lowest x),
 * then runs golden-section search to 1e-8 on the bracket around the best grid
 * point. The refined point replaces the grid point only when strictly better.
 */
inline ScalarSolution solve_scalar(const DecisionProblem& prob, const UncertaintySetSpec& spec, double eps,
                                   std::size_t grid_size = 512) {
  validate(prob);
  const auto* iv = std::get_if<Interval>(&prob.domain);
  if (iv == nullptr) throw DomainError("solve_scalar needs an interval domain");
  if (grid_size < 2) throw DomainError("grid needs at least two points");
  ScalarSolution out;
  const auto value_at = [&](double x) {
    ++out.evaluations;
    try {
      return robust_objective(induced_cost_distribution(prob, x), prob.objective, spec, eps).value;
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " (decision x = " + std::to_string(x) + ")", e.residual());
    }
  };
  const double step = (iv->hi - iv->lo) / static_cast<double>(grid_size - 1);
  std::size_t best_k = 0;
  double best = 0.0;
  for (std::size_t k = 0; k < grid_size; ++k) {
    const double x = k + 1 == grid_size ? iv->hi : iv->lo + step * static_cast<double>(k);
    const double v = value_at(x);
    if (k == 0 || v < best) {
      best = v;
      best_k = k;
    }
  }
  out.x = best_k + 1 == grid_size ? iv->hi : iv->lo + step * static_cast<double>(best_k);
  out.value = best;

  double a = std::max(iv->lo, out.x - step);
  double b = std::min(iv->hi, out.x + step);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = value_at(c);
  double fd = value_at(d);
  while (b - a > 1e-8) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = value_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = value_at(d);
    }
  }
  const double xm = fc <= fd ? c : d;
  const double fm = std::min(fc, fd);
  if (fm < out.value) {
    out.x = xm;
    out.value = fm;
  }
  return out;
}

struct SimplexOptions {
  double step_a = 1.0;  // step a / (b + t) along the normalized subgradient
  double step_b = 10.0;
  std::size_t iterations = 400;
  std::size_t restarts = 20;
  std::uint64_t seed = 1;
  std::size_t patience = 200;  // consecutive increases tolerated before reporting divergence
};

struct SimplexSolution {
  std::vector<double> x;
  double value = 0.0;
  /// LP route: optimal value of the dual maximin program. Subgradient route:
  /// best worst-case value seen over all restarts.
  double certificate = 0.0;
  double subgradient_norm = 0.0;
  std::string method;
  std::size_t iterations = 0;
};

namespace detail {

/// Euclidean projection onto the probability simplex.
inline void project_to_simplex(std::vector<double>& x) {
  std::vector<double> s = x;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (k + 1 == s.size() || s[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (double& v : x) v = v - theta > 0.0 ? v - theta : 0.0;
}

inline std::vector<double> affine_costs(const AffineCost& a, std::span<const double> x) {
  std::vector<double> c(a.intercept);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < a.dim; ++j) c[i] += a.slope[i * a.dim + j] * x[j];
  return c;
}

/// sum_i w_i * slope row i.
inline std::vector<double> affine_gradient(const AffineCost& a, std::span<const double> w) {
  std::vector<double> g(a.dim, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    for (std::size_t j = 0; j < a.dim; ++j) g[j] += w[i] * a.slope[i * a.dim + j];
  }
  return g;
}

struct Evaluation {
  double value = 0.0;
  std::vector<double> grad;
};

/// Worst-case value at x and a subgradient in x.
inline Evaluation evaluate_affine(const DecisionProblem& prob, const UncertaintySetSpec& spec, double eps,
                                  std::span<const double> x) {
  const AffineCost& a = *prob.affine;
  const DiscreteDistribution d(affine_costs(a, x), prob.probs);
  Evaluation out;
  const auto* c = std::get_if<CVaRObjective>(&prob.objective);
  const auto* s = std::get_if<SmoothPhi>(&spec);
  if (c != nullptr && s != nullptr && eps > 0.0 && !d.is_constant()) {
    // CVaR + sqrt(eps) * sqrt(2 Var(t) / phi'') / (1 - beta) with t = (f - VaR)+.
    const double beta = c->beta.value();
    out.value = rcvar_value(d, c->beta, spec, eps).value;
    out.grad = affine_gradient(a, wcs::cvar_weights(d, c->beta));
    const double v = var_upper(d.values(), d.probs(), d.descending_order(), c->beta);
    std::size_t k = d.descending_order().front();
    for (std::size_t idx : d.descending_order())
      if (d.value(idx) == v) {
        k = idx;
        break;
      }
    double m = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) m += d.prob(i) * std::max(d.value(i) - v, 0.0);
    double var = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double t = std::max(d.value(i) - v, 0.0) - m;
      var += d.prob(i) * t * t;
    }
    if (var > 0.0) {
      const double coef = std::sqrt(eps) * std::sqrt(2.0 / s->phi_dd) / (1.0 - beta) / std::sqrt(var);
      std::vector<double> w(d.size(), 0.0);
      double wk = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d.value(i) > v)) continue;
        w[i] = coef * d.prob(i) * (d.value(i) - v - m);
        wk -= w[i];
      }
      w[k] += wk;
      const auto g = affine_gradient(a, w);
      for (std::size_t j = 0; j < g.size(); ++j) out.grad[j] += g[j];
    }
    return out;
  }
  const WorstCaseResult r = robust_objective(d, prob.objective, spec, eps);
  out.value = r.value;
  out.grad = affine_gradient(a, c != nullptr ? std::span<const double>(r.tail_weights) : std::span<const double>(r.weights));
  return out;
}

/**
 * Exact polyhedral solve via the maximin LP in the tail measure Q:
 *
 *   max  t + sum_i e_i Q_i   s.t.  t <= sum_i C_ij Q_i for every j,
 *        Q = a + b,  0 <= a <= A / (1 - beta),  0 <= b <= B / (1 - beta),
 *        sum Q = 1,  sum b <= budget / (1 - beta).
 *
 * The minimizing portfolio is the vector of duals on the j-rows.
 */
inline SimplexSolution solve_simplex_lp(const DecisionProblem& prob, const UncertaintySetSpec& spec, double eps) {
  const AffineCost& aff = *prob.affine;
  const std::size_t n = prob.probs.size();
  const std::size_t dim = aff.dim;
  const double beta = std::holds_alternative<CVaRObjective>(prob.objective)
                          ? std::get<CVaRObjective>(prob.objective).beta.value()
                          : 0.0;
  const double tail = 1.0 - beta;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo_cap(n), hi_cap(n);
  std::optional<double> budget;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = prob.probs[i];
    if (std::holds_alternative<TotalVariation>(spec)) {
      lo_cap[i] = p;
      hi_cap[i] = inf;
    } else if (std::holds_alternative<Budgeted>(spec)) {
      lo_cap[i] = p;
      hi_cap[i] = eps * p;
    } else if (const auto* cc = std::get_if<ConvexCombination>(&spec)) {
      lo_cap[i] = (1.0 - eps) * p;
      hi_cap[i] = eps * p / (1.0 - cc->alpha.value());
    } else {
      lo_cap[i] = (1.0 - eps) * p;
      hi_cap[i] = eps < 1.0 ? (1.0 / (1.0 - eps) - (1.0 - eps)) * p : inf;
    }
  }
  if (std::holds_alternative<TotalVariation>(spec)) budget = 0.5 * eps;
  else if (!std::holds_alternative<Budgeted>(spec)) budget = eps;

  double cmin = 0.0, cmax = 0.0;
  for (double v : aff.slope) {
    cmin = std::min(cmin, v);
    cmax = std::max(cmax, v);
  }
  const std::size_t rows = dim + 1 + (budget ? 1 : 0);
  detail::LinearProgram lp(rows, 1 + 2 * n);
  lp.lower[0] = cmin - 1.0;
  lp.upper[0] = cmax + 1.0;
  lp.objective[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ca = 1 + i, cb = 1 + n + i;
    lp.upper[ca] = lo_cap[i] / tail;
    lp.upper[cb] = hi_cap[i] / tail;
    lp.objective[ca] = lp.objective[cb] = aff.intercept[i];
    for (std::size_t j = 0; j < dim; ++j) lp.at(j, ca) = lp.at(j, cb) = -aff.slope[i * dim + j];
    lp.at(dim, ca) = lp.at(dim, cb) = 1.0;
    if (budget) lp.at(dim + 1, cb) = 1.0;
  }
  for (std::size_t j = 0; j < dim; ++j) lp.at(j, 0) = 1.0;
  lp.equality[dim] = true;
  lp.rhs[dim] = 1.0;
  if (budget) lp.rhs[dim + 1] = *budget / tail;

  const detail::LpSolution sol = detail::solve_lp(lp);
  SimplexSolution out;
  out.x.assign(sol.duals.begin(), sol.duals.begin() + static_cast<std::ptrdiff_t>(dim));
  for (double& v : out.x) v = v > 0.0 ? v : 0.0;
  const double total = std::accumulate(out.x.begin(), out.x.end(), 0.0);
  if (!(total > 0.0)) throw ConvergenceError("LP duals do not define a portfolio", total);
  for (double& v : out.x) v /= total;
  out.certificate = sol.objective;
  out.iterations = sol.iterations;
  out.method = "lp";
  const Evaluation e = evaluate_affine(prob, spec, eps, out.x);
  out.value = e.value;
  out.subgradient_norm = std::sqrt(std::inner_product(e.grad.begin(), e.grad.end(), e.grad.begin(), 0.0));
  return out;
}

inline SimplexSolution solve_simplex_subgradient(const DecisionProblem& prob, const UncertaintySetSpec& spec,
                                                 double eps, const SimplexOptions& opt) {
  const std::size_t dim = prob.affine->dim;
  std::mt19937_64 rng(opt.seed);
  SimplexSolution out;
  out.method = "subgradient";
  bool have = false;
  for (std::size_t restart = 0; restart < std::max<std::size_t>(opt.restarts, 1); ++restart) {
    std::vector<double> x(dim, 1.0 / static_cast<double>(dim));
    if (restart > 0) {
      // Uniform draw on the simplex from normalized exponentials.
      double total = 0.0;
      for (double& v : x) {
        const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        v = -std::log(u);
        total += v;
      }
      for (double& v : x) v /= total;
    }
    std::vector<double> trace;
    std::size_t rising = 0;
    double prev = 0.0;
    for (std::size_t t = 0; t < opt.iterations; ++t) {
      const Evaluation e = evaluate_affine(prob, spec, eps, x);
      ++out.iterations;
      if (!std::isfinite(e.value)) throw DivergenceError("subgradient iterate has a non-finite value", trace);
      trace.push_back(e.value);
      if (!have || e.value < out.value) {
        out.value = e.value;
        out.x = x;
        have = true;
      }
      rising = t > 0 && e.value > prev ? rising + 1 : 0;
      prev = e.value;
      if (rising >= opt.patience) {
        std::vector<double> tail(trace.end() - static_cast<std::ptrdiff_t>(opt.patience), trace.end());
        throw DivergenceError("subgradient values kept increasing", std::move(tail));
      }
      const double norm = std::sqrt(std::inner_product(e.grad.begin(), e.grad.end(), e.grad.begin(), 0.0));
      if (norm == 0.0) break;
      const double step = opt.step_a / (opt.step_b + static_cast<double>(t)) / norm;
      for (std::size_t j = 0; j < dim; ++j) x[j] -= step * e.grad[j];
      project_to_simplex(x);
    }
  }
  out.certificate = out.value;
  const Evaluation e = evaluate_affine(prob, spec, eps, out.x);
  out.subgradient_norm = std::sqrt(std::inner_product(e.grad.begin(), e.grad.end(), e.grad.begin(), 0.0));
  return out;
}

}  // namespace detail

/**
 * @brief min over the probability simplex of V(eps; f(x, .)) for affine costs.
 *
 * TV, Budgeted, ConvexComb and Symmetric sets are solved exactly as a linear
 * program. Smooth phi sets use projected subgradient with restarts; under a
 * CVaR objective they minimize the first-order robust CVaR.
 */
inline SimplexSolution solve_simplex(const DecisionProblem& prob, const UncertaintySetSpec& spec, double eps,
                                     const SimplexOptions& opt = {}) {
  validate(prob);
  if (!std::holds_alternative<Simplex>(prob.domain)) throw DomainError("solve_simplex needs a simplex domain");
  if (!prob.affine) throw UnsupportedFamily("solve_simplex needs a cost that is affine in the decision");
  if (std::holds_alternative<WassersteinBall>(spec))
    throw UnsupportedFamily("Wasserstein sets are not supported by the DRO solvers");
  detail::check_radius(spec, eps);
  if (std::get<Simplex>(prob.domain).dim == 1) {
    SimplexSolution out;
    out.x = {1.0};
    out.value = out.certificate = robust_objective(induced_cost_distribution(prob, out.x), prob.objective, spec, eps).value;
    out.method = "trivial";
    return out;
  }
  if (std::holds_alternative<SmoothPhi>(spec) && eps > 0.0)
    return detail::solve_simplex_subgradient(prob, spec, eps, opt);
  return detail::solve_simplex_lp(prob, spec, eps);
}

struct FrontierPoint {
  double eps = 0.0;
  std::vector<double> decision;
  double nominal = 0.0;        // mean, or CVaR for CVaR objectives
  double robust_value = 0.0;   // V(eps) at the decision
  std::vector<std::pair<std::string, double>> sensitivities;
  std::optional<std::string> error;

  std::optional<double> sensitivity(const std::string& name) const {
    for (const auto& [k, v] : sensitivities)
      if (k == name) return v;
    return std::nullopt;
  }
};

/// Label for a measure column: family name, with alpha for convex-combination sets.
inline std::string measure_label(const UncertaintySetSpec& spec) {
  if (const auto* cc = std::get_if<ConvexCombination>(&spec)) {
    std::string a = std::to_string(cc->alpha.value());
    a.erase(a.find_last_not_of('0') + 1);
    if (!a.empty() && a.back() == '.') a.pop_back();
    return "cc" + a;
  }
  return family_name(spec);
}

struct FrontierOptions {
  std::size_t grid_size = 512;
  SimplexOptions simplex;
};

/// Solves at each eps and scores the induced cost of the decision under every measure.
inline std::vector<FrontierPoint> frontier(const DecisionProblem& prob, const UncertaintySetSpec& solve_spec,
                                           std::span<const double> eps_grid,
                                           std::span<const UncertaintySetSpec> measures,
                                           const FrontierOptions& opt = {}) {
  if (measures.empty()) throw DomainError("frontier needs at least one measure");
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] > eps_grid[i - 1])) throw DomainError("eps grid must be increasing");
  std::vector<FrontierPoint> out;
  out.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    FrontierPoint pt;
    pt.eps = eps;
    try {
      if (std::holds_alternative<Interval>(prob.domain)) {
        const ScalarSolution s = solve_scalar(prob, solve_spec, eps, opt.grid_size);
        pt.decision = {s.x};
        pt.robust_value = s.value;
      } else {
        SimplexSolution s = solve_simplex(prob, solve_spec, eps, opt.simplex);
        pt.decision = std::move(s.x);
        pt.robust_value = s.value;
      }
      const DiscreteDistribution d = induced_cost_distribution(prob, pt.decision);
      pt.nominal = nominal_objective(d, prob.objective);
      for (const auto& m : measures) {
        const double v = std::holds_alternative<CVaRObjective>(prob.objective)
                             ? rcvar_sensitivity(d, std::get<CVaRObjective>(prob.objective).beta, m).value
                             : sensitivity(d, m).value;
        pt.sensitivities.emplace_back(measure_label(m), v);
      }
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

/// Grid of `points` radii from 0 to max_eps: geometric for sqrt-growth families, arithmetic otherwise.
inline std::vector<double> default_eps_grid(const UncertaintySetSpec& spec, double max_eps, std::size_t points) {
  if (!(max_eps > 0.0) || points < 2) throw DomainError("eps grid needs max_eps > 0 and at least two points");
  std::vector<double> g(points, 0.0);
  if (growth_of(spec) == Growth::Sqrt) {
    const double first = max_eps * 1e-3;
    for (std::size_t k = 1; k < points; ++k)
      g[k] = k + 1 == points ? max_eps
                             : first * std::pow(max_eps / first, static_cast<double>(k - 1) / static_cast<double>(points - 2));
  } else {
    for (std::size_t k = 1; k < points; ++k)
      g[k] = k + 1 == points ? max_eps : max_eps * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return g;
}

/// Pairs (i, j), i < j, where the later point j has both a lower nominal value
/// and a lower `measure` sensitivity than point i, each by more than tol.
inline std::vector<std::pair<std::size_t, std::size_t>> dominated_pairs(std::span<const FrontierPoint> pts,
                                                                        const std::string& measure,
                                                                        double tol = 1e-6) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i].error || pts[j].error) continue;
      const auto si = pts[i].sensitivity(measure), sj = pts[j].sensitivity(measure);
      if (!si || !sj) continue;
      if (pts[j].nominal < pts[i].nominal - tol && *sj < *si - tol) out.emplace_back(i, j);
    }
  return out;
}

/// Piecewise-linear interpolation of y over x through the given points, nullopt outside their range.
inline std::optional<double> interpolate(std::vector<std::pair<double, double>> xy, double x) {
  if (xy.empty()) return std::nullopt;
  std::sort(xy.begin(), xy.end());
  if (x < xy.front().first || x > xy.back().first) return std::nullopt;
  for (std::size_t k = 0; k + 1 < xy.size(); ++k) {
    const auto [x0, y0] = xy[k];
    const auto [x1, y1] = xy[k + 1];
    if (x > x1) continue;
    if (x1 == x0) return std::min(y0, y1);
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  }
  return xy.back().second;
}

}  // namespace wcs
