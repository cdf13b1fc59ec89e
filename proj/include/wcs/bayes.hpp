#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wcs/core_dist.hpp"
#include "wcs/errors.hpp"
#include "wcs/uncertainty.hpp"

namespace wcs {

/// Finite mixture: component j has weight weights[j] and cost distribution components[j].
struct MixtureModel {
  std::vector<double> weights;
  std::vector<DiscreteDistribution> components;

  MixtureModel(std::vector<double> w, std::vector<DiscreteDistribution> c)
      : weights(std::move(w)), components(std::move(c)) {
    if (components.empty()) throw DomainError("mixture needs at least one component");
    if (weights.size() != components.size()) throw DomainError("mixture needs one weight per component");
    // Reuses the distribution checks: positive weights summing to 1 within 1e-12.
    const DiscreteDistribution check(std::vector<double>(weights.size(), 0.0), weights);
    weights.assign(check.probs().begin(), check.probs().end());
  }
};

namespace detail {

inline DiscreteDistribution component_means(const MixtureModel& m) {
  std::vector<double> v;
  for (const auto& c : m.components) v.push_back(mean(c));
  return {std::move(v), m.weights};
}

}  // namespace detail

inline double mixture_mean(const MixtureModel& m) { return mean(detail::component_means(m)); }

/// sqrt(2 / phi''(1)) times the weighted stdev of the component means.
inline double posterior_sensitivity(const MixtureModel& m, double phi_dd) {
  if (!(phi_dd > 0.0)) throw DomainError("phi''(1) must be positive");
  return std::sqrt(2.0 / phi_dd) * stdev(detail::component_means(m));
}

/// sqrt(2 / phi''(1)) times the weighted average of the component stdevs.
inline double likelihood_sensitivity(const MixtureModel& m, double phi_dd) {
  if (!(phi_dd > 0.0)) throw DomainError("phi''(1) must be positive");
  double s = 0.0;
  for (std::size_t j = 0; j < m.components.size(); ++j) s += m.weights[j] * stdev(m.components[j]);
  return std::sqrt(2.0 / phi_dd) * s;
}

struct PenaltySensitivities {
  double posterior = 0.0;   // variance of the component means
  double likelihood = 0.0;  // average component variance
};

inline PenaltySensitivities penalty_sensitivities(const MixtureModel& m) {
  PenaltySensitivities out;
  out.posterior = variance(detail::component_means(m));
  for (std::size_t j = 0; j < m.components.size(); ++j) out.likelihood += m.weights[j] * variance(m.components[j]);
  return out;
}

struct NestedCheck {
  double expansion = 0.0;
  double nested_exact = 0.0;
  double gap = 0.0;  // nested_exact - expansion
};

/**
 * @brief Compares the two-term expansion with the nested worst case.
 *
 * expansion = mean + sqrt(delta) * likelihood + sqrt(eps) * posterior.
 * nested_exact solves each component's worst case at radius delta, then the
 * worst case over the mixture weights at radius eps with those values.
 */
inline NestedCheck nested_worst_case_check(const MixtureModel& m, const SmoothPhi& phi, double eps, double delta) {
  if (!(eps >= 0.0 && delta >= 0.0)) throw DomainError("radii must be nonnegative");
  NestedCheck out;
  out.expansion = mixture_mean(m) + std::sqrt(delta) * likelihood_sensitivity(m, phi.phi_dd) +
                  std::sqrt(eps) * posterior_sensitivity(m, phi.phi_dd);
  std::vector<double> inner(m.components.size());
  for (std::size_t j = 0; j < m.components.size(); ++j) {
    try {
      inner[j] = worst_case(m.components[j], phi, delta).value;
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " (component " + std::to_string(j) + ")", e.residual());
    }
  }
  out.nested_exact = worst_case(DiscreteDistribution(std::move(inner), m.weights), phi, eps).value;
  out.gap = out.nested_exact - out.expansion;
  return out;
}

inline NestedCheck nested_worst_case_check(const MixtureModel& m, double phi_dd, double eps, double delta) {
  return nested_worst_case_check(m, modified_chi2(phi_dd), eps, delta);
}

}  // namespace wcs
