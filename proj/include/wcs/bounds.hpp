#pragma once

#include <cmath>
#include <vector>

#include "wcs/core_dist.hpp"
#include "wcs/errors.hpp"

namespace wcs {

/**
 * @brief Best constant C with CVaR_alpha(f) - mean(f) <= C stdev(f) for n equally weighted atoms.
 *
 * C = sqrt(n (k + (kappa - k)^2) - kappa^2) / kappa with kappa = n (1 - alpha), k = floor(kappa).
 */
inline double c_alpha_n(RiskLevel alpha, std::size_t n) {
  if (n == 0) throw DomainError("n must be positive");
  const double nn = static_cast<double>(n);
  const double kappa = nn * (1.0 - alpha.value());
  if (!(kappa > 0.0)) throw DomainError("n (1 - alpha) must be positive");
  const double k = std::floor(kappa);
  const double frac = kappa - k;
  return std::sqrt(std::max(nn * (k + frac * frac) - kappa * kappa, 0.0)) / kappa;
}

struct ExtremalVector {
  DiscreteDistribution distribution;
  bool degenerate = false;  // kappa = n: the extremal vector is identically zero
};

/// Equally weighted values that attain c_alpha_n: k high atoms, one split atom, the rest low.
inline ExtremalVector extremal_vector(RiskLevel alpha, std::size_t n) {
  if (n == 0) throw DomainError("n must be positive");
  const double nn = static_cast<double>(n);
  const double kappa = nn * (1.0 - alpha.value());
  const double kf = std::floor(kappa);
  const double denom = nn * (kf + (kappa - kf) * (kappa - kf)) - kappa * kappa;
  if (!(denom > 0.0)) return {DiscreteDistribution::empirical(std::vector<double>(n, 0.0)), true};
  const auto k = static_cast<std::size_t>(kf);
  std::vector<double> z(n, -kappa * kappa / denom);
  for (std::size_t j = 0; j < k; ++j) z[j] = kappa * (nn - kappa) / denom;
  if (k < n) z[k] = (-kappa * kappa + nn * kappa * (kappa - kf)) / denom;
  return {DiscreteDistribution::empirical(std::move(z)), false};
}

struct DominanceRecord {
  double stdev = 0.0;         // sqrt(phi''/2) * S_phi
  double tv = 0.0;            // S_TV = range / 2
  double cvar_deviation = 0.0;
  double budgeted = 0.0;      // mean - min
  double c_alpha_n = 0.0;
  bool tv_bound = true;       // stdev <= S_TV
  bool cvar_bound = true;     // S_c <= C_{alpha,n} stdev
  bool budgeted_bound = true; // S_b <= sqrt(n - 1) stdev
};

/**
 * @brief Checks the comparison inequalities between sensitivity measures.
 *
 * Only defined for equally weighted atoms; other inputs are rejected. The
 * smooth-phi sensitivity enters through sqrt(phi''/2) S_phi, which is the
 * standard deviation whatever phi''(1) is. The budgeted bound is checked as a
 * non-strict inequality since one low atom with the rest equal attains it.
 */
inline DominanceRecord check_dominance(const DiscreteDistribution& d, double phi_dd, RiskLevel alpha) {
  if (!(phi_dd > 0.0)) throw DomainError("phi''(1) must be positive");
  if (!d.is_uniform()) throw DomainError("dominance bounds need equally weighted atoms");
  DominanceRecord r;
  const double s_phi = std::sqrt(2.0 * variance(d) / phi_dd);
  r.stdev = std::sqrt(phi_dd / 2.0) * s_phi;
  r.tv = 0.5 * range(d);
  r.cvar_deviation = cvar_deviation(d, alpha);
  r.budgeted = mean(d) - min_value(d);
  r.c_alpha_n = c_alpha_n(alpha, d.size());
  const auto le = [](double lhs, double rhs) { return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs)); };
  r.tv_bound = le(r.stdev, r.tv);
  r.cvar_bound = le(r.cvar_deviation, r.c_alpha_n * r.stdev);
  r.budgeted_bound = le(r.budgeted, std::sqrt(static_cast<double>(d.size()) - 1.0) * r.stdev);
  return r;
}

}  // namespace wcs
