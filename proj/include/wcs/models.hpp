#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wcs/csv.hpp"
#include "wcs/dro.hpp"
#include "wcs/errors.hpp"

namespace wcs {

/// Newsvendor prices: sale r, order cost c, salvage q, shortage penalty s.
struct InventoryParams {
  double r = 10.0;
  double c = 2.0;
  double q = 0.0;
  double s = 4.0;

  void validate() const {
    if (!(0.0 <= q && q < c && c < r)) throw DomainError("inventory prices need 0 <= q < c < r");
    if (!(s >= 0.0)) throw DomainError("shortage penalty must be nonnegative");
  }
};

/// -r min(x, Y) - q max(x - Y, 0) + s max(Y - x, 0) + c x
inline double inventory_cost(const InventoryParams& p, double x, double y) {
  return -p.r * std::min(x, y) - p.q * std::max(x - y, 0.0) + p.s * std::max(y - x, 0.0) + p.c * x;
}

/**
 * @brief Order-quantity problem over x in [0, 1.5 max demand].
 *
 * Demands are equally weighted unless `probs` is given.
 */
inline DecisionProblem inventory_problem(const InventoryParams& params, const std::vector<double>& demands,
                                         std::optional<std::vector<double>> probs = std::nullopt,
                                         Objective objective = MeanObjective{}) {
  params.validate();
  if (demands.empty()) throw DomainError("inventory problem needs at least one demand");
  for (double y : demands)
    if (!std::isfinite(y) || y < 0.0) throw DomainError("demands must be finite and nonnegative");
  const double top = *std::max_element(demands.begin(), demands.end());
  if (!(top > 0.0)) throw DomainError("inventory problem needs a positive demand");
  DecisionProblem prob;
  for (double y : demands) prob.scenarios.push_back({y});
  prob.probs = probs ? std::move(*probs)
                     : std::vector<double>(demands.size(), 1.0 / static_cast<double>(demands.size()));
  prob.cost = [params](std::span<const double> x, std::span<const double> y) {
    return inventory_cost(params, x[0], y[0]);
  };
  prob.domain = Interval{0.0, 1.5 * top};
  prob.objective = objective;
  validate(prob);
  return prob;
}

/// Uniform draw in the open interval (0, 1) from the top 53 bits of one output.
inline double open_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal by Box-Muller; uses two draws, keeps the cosine branch.
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = open_uniform(rng);
  const double u2 = open_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/**
 * @brief Demands from a two-component exponential mixture.
 *
 * Generator: std::mt19937_64 seeded with `seed`. Each demand uses two draws:
 * the first picks the low-mean component when below `w_low`, the second is
 * mapped through the inverse CDF -mu log(u).
 */
inline std::vector<double> exp_mixture_demand(std::size_t n, double mu_low, double mu_high, double w_low,
                                              std::uint64_t seed) {
  if (n == 0) throw DomainError("need at least one demand");
  if (!(mu_low > 0.0 && mu_high > 0.0)) throw DomainError("exponential means must be positive");
  if (!(w_low >= 0.0 && w_low <= 1.0)) throw DomainError("mixture weight must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (double& y : out) {
    const double pick = open_uniform(rng);
    const double mu = pick < w_low ? mu_low : mu_high;
    y = -mu * std::log(open_uniform(rng));
  }
  return out;
}

/// n scenarios x d assets of rates of return, row-major.
struct ReturnsMatrix {
  std::vector<std::string> names;
  std::vector<double> data;
  std::size_t n = 0;
  std::size_t d = 0;

  double at(std::size_t i, std::size_t j) const { return data[i * d + j]; }
};

/**
 * @brief min over portfolios x of CVaR_beta(-R x); scenarios equally weighted.
 */
inline DecisionProblem portfolio_problem(const ReturnsMatrix& returns, RiskLevel beta) {
  if (returns.n == 0 || returns.d == 0) throw DomainError("returns matrix is empty");
  DecisionProblem prob;
  AffineCost aff;
  aff.dim = returns.d;
  aff.intercept.assign(returns.n, 0.0);
  aff.slope.resize(returns.n * returns.d);
  for (std::size_t i = 0; i < returns.n; ++i) {
    prob.scenarios.emplace_back(returns.data.begin() + static_cast<std::ptrdiff_t>(i * returns.d),
                                returns.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * returns.d));
    for (std::size_t j = 0; j < returns.d; ++j) aff.slope[i * returns.d + j] = -returns.at(i, j);
  }
  prob.probs.assign(returns.n, 1.0 / static_cast<double>(returns.n));
  prob.cost = [](std::span<const double> x, std::span<const double> y) {
    double c = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) c -= y[j] * x[j];
    return c;
  };
  prob.domain = Simplex{returns.d};
  prob.objective = CVaRObjective{beta};
  prob.affine = std::move(aff);
  validate(prob);
  return prob;
}

/**
 * @brief Reads a returns CSV: a header of asset names, then one scenario per row.
 *
 * A first header cell that is blank or reads date/month/period/yyyymm marks a
 * leading date column, which is skipped. Every value is multiplied by `scale`
 * (0.01 converts percent returns to decimals).
 */
inline ReturnsMatrix read_returns_csv(std::istream& in, double scale = 1.0) {
  const auto lines = csv::read_lines(in);
  if (lines.empty()) throw ParseError("empty returns file", 0, 0);
  const auto header = csv::split(lines.front().second);
  std::string first;
  for (char ch : header.front()) first.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  const bool dated = first.empty() || first == "date" || first == "month" || first == "period" || first == "yyyymm";
  ReturnsMatrix out;
  for (std::size_t j = dated ? 1 : 0; j < header.size(); ++j) {
    if (header[j].empty()) throw ParseError("blank asset name", lines.front().first, j + 1);
    out.names.emplace_back(header[j]);
  }
  out.d = out.names.size();
  if (out.d == 0) throw ParseError("returns header names no assets", lines.front().first, 1);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto& [row, text] = lines[l];
    const auto cells = csv::split(text);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()),
                       row, std::min(cells.size(), header.size()) + 1);
    for (std::size_t j = dated ? 1 : 0; j < cells.size(); ++j)
      out.data.push_back(scale * csv::parse_number(cells[j], row, j + 1));
    ++out.n;
  }
  if (out.n == 0) throw ParseError("returns file has a header but no scenarios", lines.front().first, 0);
  return out;
}

inline ReturnsMatrix load_returns_csv(const std::string& path, double scale = 1.0) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
  return read_returns_csv(in, scale);
}

inline void write_returns_csv(std::ostream& out, const ReturnsMatrix& r) {
  for (std::size_t j = 0; j < r.d; ++j) out << (j ? "," : "") << r.names[j];
  out << '\n';
  for (std::size_t i = 0; i < r.n; ++i) {
    for (std::size_t j = 0; j < r.d; ++j) out << (j ? "," : "") << csv::format_number(r.at(i, j));
    out << '\n';
  }
}

inline void save_returns_csv(const std::string& path, const ReturnsMatrix& r) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'", 0, 0);
  write_returns_csv(out, r);
}

/**
 * @brief Seeded synthetic monthly returns in percent with a heavy loss tail.
 *
 * One market factor drives every asset. In 4% of months the factor takes a
 * crash draw whose size is exponential, so losses have a long right tail;
 * otherwise it is Gaussian. Assets differ in mean, factor loading, and
 * idiosyncratic volatility. Same std::mt19937_64 scheme as the demand sampler.
 */
inline ReturnsMatrix synthetic_returns(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw DomainError("synthetic returns need n, d >= 1");
  std::mt19937_64 rng(seed);
  ReturnsMatrix out;
  out.n = n;
  out.d = d;
  std::vector<double> mu(d), load(d), vol(d), crash(d);
  for (std::size_t j = 0; j < d; ++j) {
    out.names.push_back("A" + std::to_string(j + 1));
    mu[j] = 0.6 + 0.8 * open_uniform(rng);
    load[j] = 0.5 + 1.0 * open_uniform(rng);
    vol[j] = 3.0 + 5.0 * open_uniform(rng);
    crash[j] = 0.5 + 1.5 * open_uniform(rng);
  }
  out.data.resize(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const bool crashed = open_uniform(rng) < 0.04;
    const double market = crashed ? -8.0 * (1.0 - std::log(open_uniform(rng))) : 3.0 * standard_normal(rng);
    for (std::size_t j = 0; j < d; ++j) {
      const double beta = crashed ? crash[j] : load[j];
      out.data[i * d + j] = mu[j] + beta * market + vol[j] * standard_normal(rng);
    }
  }
  return out;
}

}  // namespace wcs
