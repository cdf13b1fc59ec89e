#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wcs/detail/sorted.hpp"
#include "wcs/errors.hpp"

namespace wcs {

/// Tail level in [0, 1). Used for both CVaR levels (alpha) and VaR levels (beta).
class RiskLevel {
 public:
  constexpr RiskLevel() = default;
  explicit RiskLevel(double level) : value_(level) {
    if (!(level >= 0.0 && level < 1.0))
      throw DomainError("risk level must lie in [0, 1), got " + std::to_string(level));
  }
  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

/**
 * @brief Finite set of cost values with strictly positive probabilities.
 *
 * Probabilities must sum to one within 1e-12; inputs inside that band are
 * divided by their sum and the pre-normalization error is kept in
 * normalization_adjustment(). A descending order of the values (ties broken
 * by ascending index) is computed once at construction.
 */
class DiscreteDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  DiscreteDistribution(std::vector<double> values, std::vector<double> probs)
      : values_(std::move(values)), probs_(std::move(probs)) {
    validate_and_normalize();
  }

  /// Same as the constructor, but atoms with probability exactly zero are removed.
  static DiscreteDistribution dropping_zero_atoms(std::vector<double> values,
                                                  std::vector<double> probs) {
    if (values.size() != probs.size())
      throw DomainError("values and probs must have the same length");
    std::vector<double> v;
    std::vector<double> p;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (probs[i] == 0.0) continue;
      v.push_back(values[i]);
      p.push_back(probs[i]);
    }
    const std::size_t dropped = values.size() - v.size();
    DiscreteDistribution d(std::move(v), std::move(p));
    d.dropped_atoms_ = dropped;
    return d;
  }

  /// Empirical distribution with weight 1/n on each sample.
  static DiscreteDistribution empirical(std::vector<double> samples) {
    const std::size_t n = samples.size();
    return DiscreteDistribution(std::move(samples),
                                std::vector<double>(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n)));
  }

  static DiscreteDistribution point_mass(double value) { return {{value}, {1.0}}; }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> probs() const noexcept { return probs_; }
  double value(std::size_t i) const { return values_[i]; }
  double prob(std::size_t i) const { return probs_[i]; }

  /// Indices of atoms sorted by value, largest first.
  std::span<const std::size_t> descending_order() const noexcept { return order_; }
  double sorted_value(std::size_t rank) const { return values_[order_[rank]]; }
  double sorted_prob(std::size_t rank) const { return probs_[order_[rank]]; }

  /// sum(p) - 1 as supplied, before renormalization.
  double normalization_adjustment() const noexcept { return adjustment_; }
  bool renormalized() const noexcept { return adjustment_ != 0.0; }
  std::size_t dropped_atoms() const noexcept { return dropped_atoms_; }

  bool is_constant() const noexcept { return values_[order_.front()] == values_[order_.back()]; }
  bool is_uniform() const noexcept {
    const double u = 1.0 / static_cast<double>(size());
    return std::all_of(probs_.begin(), probs_.end(),
                       [u](double p) { return std::abs(p - u) <= kSumTolerance; });
  }

 private:
  void validate_and_normalize() {
    if (values_.empty()) throw DomainError("distribution needs at least one atom");
    if (values_.size() != probs_.size())
      throw DomainError("values and probs must have the same length");
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]))
        throw DomainError("value " + std::to_string(i) + " is not finite");
      if (!(probs_[i] > 0.0) || !std::isfinite(probs_[i]))
        throw DomainError("probability " + std::to_string(i) + " must be positive, got " +
                          std::to_string(probs_[i]));
      sum += probs_[i];
    }
    adjustment_ = sum - 1.0;
    if (std::abs(adjustment_) > kSumTolerance)
      throw DomainError("probabilities sum to " + std::to_string(sum) + ", not 1");
    if (adjustment_ != 0.0)
      for (double& p : probs_) p /= sum;
    order_ = detail::descending_order(values_);
  }

  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<std::size_t> order_;
  double adjustment_ = 0.0;
  std::size_t dropped_atoms_ = 0;
};

inline double mean(const DiscreteDistribution& d) {
  if (d.is_constant()) return d.value(0);
  return detail::dot(d.values(), d.probs());
}

inline double variance(const DiscreteDistribution& d) {
  if (d.is_constant()) return 0.0;
  const double m = mean(d);
  double v = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = d.value(i) - m;
    v += d.prob(i) * e * e;
  }
  return v;
}

inline double stdev(const DiscreteDistribution& d) { return std::sqrt(variance(d)); }
inline double max_value(const DiscreteDistribution& d) { return d.sorted_value(0); }
inline double min_value(const DiscreteDistribution& d) { return d.sorted_value(d.size() - 1); }
inline double range(const DiscreteDistribution& d) { return max_value(d) - min_value(d); }

/// beta-VaR: f_(k+1) where sum_{i<=k} p_(i) <= 1-beta < sum_{i<=k+1} p_(i).
inline double var_quantile(const DiscreteDistribution& d, RiskLevel beta) {
  return detail::var_lower(d.values(), d.probs(), d.descending_order(), beta);
}

/// True when 1-beta coincides with a cumulative tail mass, i.e. VaR is ambiguous.
inline bool var_is_degenerate(const DiscreteDistribution& d, RiskLevel beta) {
  return beta.value() > 0.0 && detail::on_knife_edge(d.probs(), d.descending_order(), beta);
}

/// Greedy maximizing weights of f'q over {0 <= q <= p/(1-alpha), sum q = 1}.
inline std::vector<double> cvar_weights(const DiscreteDistribution& d, RiskLevel alpha) {
  return detail::cvar_weights(d.probs(), d.descending_order(), alpha);
}

inline double cvar(const DiscreteDistribution& d, RiskLevel alpha) {
  if (alpha.value() == 0.0) return mean(d);
  if (d.is_constant()) return d.value(0);
  return detail::dot(d.values(), cvar_weights(d, alpha));
}

inline double cvar_deviation(const DiscreteDistribution& d, RiskLevel alpha) {
  if (d.is_constant()) return 0.0;
  return cvar(d, alpha) - mean(d);
}

/// Same probabilities, values max(f_i - VaR_beta, 0).
inline DiscreteDistribution upper_tail_excess(const DiscreteDistribution& d, RiskLevel beta) {
  const double v = var_quantile(d, beta);
  std::vector<double> excess(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) excess[i] = std::max(d.value(i) - v, 0.0);
  return {std::move(excess), std::vector<double>(d.probs().begin(), d.probs().end())};
}

}  // namespace wcs
