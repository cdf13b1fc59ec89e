#pragma once

// Worst-case solvers for smooth phi-divergence balls
//   max { f'q : sum p phi(q/p) <= eps, sum q = 1, q >= 0 }.
// All routines take the values in descending `order` and expect a
// non-constant f and eps > 0; the caller handles the trivial cases.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wcs/detail/sorted.hpp"
#include "wcs/errors.hpp"

namespace wcs::detail {

struct SmoothSolution {
  std::vector<double> weights;
  double delta = 0.0;  // multiplier scale in q_i = p_i (phi')^{-1}(delta (f_i + c))
  double c = 0.0;
  bool saturated = false;
};

/// Mass of the atoms tied with the maximum value, and how many there are.
inline std::pair<double, std::size_t> top_group(std::span<const double> values,
                                                std::span<const double> probs,
                                                std::span<const std::size_t> order) {
  const double top = values[order.front()];
  double mass = 0.0;
  std::size_t count = 0;
  for (std::size_t idx : order) {
    if (values[idx] != top) break;
    mass += probs[idx];
    ++count;
  }
  return {mass, count};
}

/// Point mass spread over the tied maxima in proportion to p.
inline SmoothSolution saturated_solution(std::span<const double> values,
                                         std::span<const double> probs,
                                         std::span<const std::size_t> order) {
  const auto [mass, count] = top_group(values, probs, order);
  SmoothSolution out;
  out.weights.assign(probs.size(), 0.0);
  for (std::size_t r = 0; r < count; ++r) out.weights[order[r]] = probs[order[r]] / mass;
  out.saturated = true;
  out.delta = kInf;
  out.c = -values[order.front()];
  return out;
}

/**
 * @brief Exact worst case for phi(t) = (t-1)^2 / 2 (modified chi-square, phi''(1) = 1).
 *
 * The maximizer is q_i = p_i z_i with z affine in f on a support made of the
 * m largest values and zero elsewhere. For a support S with mass P, conditional
 * mean m and spread W = sum_S p (f - m)^2 the slope is
 * s = sqrt((2 eps - (1-P)/P) / W). The support is the largest one for which z
 * stays nonnegative on S and the extension of z is nonpositive just outside.
 * Supports never split a block of tied values.
 */
inline SmoothSolution chi2_worst_case(std::span<const double> values,
                                      std::span<const double> probs,
                                      std::span<const std::size_t> order, double eps) {
  const std::size_t n = order.size();
  const auto [top_mass, top_count] = top_group(values, probs, order);
  if (eps >= 0.5 * (1.0 / top_mass - 1.0)) return saturated_solution(values, probs, order);

  // Centered prefix sums keep W accurate when the spread is small relative to the level.
  double mu = 0.0;
  for (std::size_t i = 0; i < n; ++i) mu += probs[i] * values[i];
  std::vector<double> P(n + 1, 0.0), A(n + 1, 0.0), B(n + 1, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double p = probs[order[r]];
    const double g = values[order[r]] - mu;
    P[r + 1] = P[r] + p;
    A[r + 1] = A[r] + p * g;
    B[r + 1] = B[r] + p * g * g;
  }
  constexpr double tol = 1e-12;
  for (std::size_t m = n; m >= 1; --m) {
    if (m < n && values[order[m - 1]] == values[order[m]]) continue;
    const double mass = P[m];
    const double cond_mean = A[m] / mass;
    const double spread = std::max(B[m] - A[m] * A[m] / mass, 0.0);
    const double slack = 2.0 * eps - (1.0 - mass) / mass;
    if (slack < 0.0 || spread <= 0.0) continue;
    const double s = std::sqrt(slack / spread);
    const auto z = [&](std::size_t r) { return 1.0 / mass + s * (values[order[r]] - mu - cond_mean); };
    if (z(m - 1) < -tol) continue;
    if (m < n && z(m) > tol) continue;
    SmoothSolution out;
    out.weights.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) out.weights[order[r]] = probs[order[r]] * std::max(z(r), 0.0);
    out.delta = s;
    out.c = (1.0 / mass - 1.0) / s - (cond_mean + mu);
    return out;
  }
  return saturated_solution(values, probs, order);
}

/**
 * @brief Exact worst case for phi(t) = t log t - t + 1 (KL, phi''(1) = 1).
 *
 * q is proportional to p exp(theta f); theta solves KL(q_theta || p) = eps,
 * a monotone 1-D equation with derivative theta Var_q(f). Newton steps are
 * safeguarded by bisection on a doubling bracket.
 */
inline SmoothSolution kl_worst_case(std::span<const double> values, std::span<const double> probs,
                                    std::span<const std::size_t> order, double eps,
                                    double variance) {
  const std::size_t n = order.size();
  const auto [top_mass, top_count] = top_group(values, probs, order);
  const double cap = -std::log(top_mass);
  if (eps >= cap - 1e-13) return saturated_solution(values, probs, order);

  const double fmax = values[order.front()];
  std::vector<double> w(n);
  struct Eval {
    double kl, var, log_z;
  };
  const auto evaluate = [&](double theta) {
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = values[i] - fmax;
      w[i] = probs[i] * std::exp(theta * g);
      z += w[i];
      m1 += w[i] * g;
      m2 += w[i] * g * g;
    }
    m1 /= z;
    m2 /= z;
    return Eval{theta * m1 - std::log(z), std::max(m2 - m1 * m1, 0.0), std::log(z)};
  };

  double lo = 0.0;
  double hi = std::sqrt(2.0 * eps / variance);
  Eval e = evaluate(hi);
  for (int i = 0; i < 2100 && e.kl < eps; ++i) {
    lo = hi;
    hi *= 2.0;
    e = evaluate(hi);
  }
  if (e.kl < eps) throw ConvergenceError("KL radius bracket not found", eps - e.kl);

  double theta = hi;
  double residual = e.kl - eps;
  for (int iter = 0; iter < 500; ++iter) {
    if (std::abs(residual) <= 1e-14 * std::max(1.0, eps) || hi - lo <= 1e-15 * hi) {
      SmoothSolution out;
      out.weights.resize(n);
      const double z = std::exp(e.log_z);
      for (std::size_t i = 0; i < n; ++i) out.weights[i] = w[i] / z;
      out.delta = theta;
      out.c = -(fmax + e.log_z / theta);
      return out;
    }
    if (residual > 0.0) hi = theta; else lo = theta;
    const double slope = theta * e.var;
    double next = slope > 0.0 ? theta - residual / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    theta = next;
    e = evaluate(theta);
    residual = e.kl - eps;
  }
  throw ConvergenceError("KL radius equation did not converge", residual);
}

/// Conjugate-side description of a user-supplied divergence function phi.
struct ConjugatePhi {
  std::function<double(double)> conj;     // phi*(zeta)
  std::function<double(double)> conj_d1;  // phi*'(zeta) = (phi')^{-1}(zeta), clamped at 0
  std::function<double(double)> conj_d2;  // phi*''(zeta)
  std::function<double(double)> phi;      // optional; enables the saturation shortcut
};

/**
 * @brief Damped Newton on the two first-order conditions of the dual in (delta, c).
 *
 *   F1 = sum p phi*'(zeta) - 1 = 0,
 *   F2 = sum p (phi*(zeta) - zeta phi*'(zeta)) + eps = 0,   zeta_i = delta (f_i + c),
 *
 * started at delta0 = sqrt(2 phi''(1) eps / Var), c0 = -mean.
 */
inline SmoothSolution conjugate_newton(std::span<const double> values,
                                       std::span<const double> probs,
                                       std::span<const std::size_t> order, double eps,
                                       const ConjugatePhi& fn, double phi_dd, double mean,
                                       double variance, double tol = 1e-10,
                                       int max_iter = 100) {
  const std::size_t n = order.size();
  if (fn.phi) {
    const auto [top_mass, top_count] = top_group(values, probs, order);
    const double sat = top_mass * fn.phi(1.0 / top_mass) + (1.0 - top_mass) * fn.phi(0.0);
    if (std::isfinite(sat) && eps >= sat) return saturated_solution(values, probs, order);
  }
  struct State {
    double f1, f2, j11, j12, j21, j22;
  };
  const auto evaluate = [&](double delta, double c) {
    State s{-1.0, eps, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double g = values[i] + c;
      const double zeta = delta * g;
      const double d1 = fn.conj_d1(zeta);
      const double d2 = fn.conj_d2(zeta);
      const double p = probs[i];
      s.f1 += p * d1;
      s.f2 += p * (fn.conj(zeta) - zeta * d1);
      s.j11 += p * d2 * g;
      s.j12 += p * d2 * delta;
      s.j21 -= p * zeta * d2 * g;
      s.j22 -= p * zeta * d2 * delta;
    }
    return s;
  };
  const auto norm = [](const State& s) { return std::max(std::abs(s.f1), std::abs(s.f2)); };

  double delta = std::sqrt(2.0 * phi_dd * eps / variance);
  double c = -mean;
  State st = evaluate(delta, c);
  for (int iter = 0; iter < max_iter; ++iter) {
    if (norm(st) <= tol) {
      SmoothSolution out;
      out.weights.resize(n);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        out.weights[i] = probs[i] * std::max(fn.conj_d1(delta * (values[i] + c)), 0.0);
        total += out.weights[i];
      }
      for (double& q : out.weights) q /= total;
      out.delta = delta;
      out.c = c;
      return out;
    }
    const double det = st.j11 * st.j22 - st.j12 * st.j21;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det))
      throw ConvergenceError("singular Jacobian in dual Newton", norm(st));
    const double dd = -(st.j22 * st.f1 - st.j12 * st.f2) / det;
    const double dc = -(-st.j21 * st.f1 + st.j11 * st.f2) / det;
    double step = 1.0;
    State trial{};
    bool accepted = false;
    for (int half = 0; half < 40; ++half, step *= 0.5) {
      const double nd = delta + step * dd;
      if (!(nd > 0.0)) continue;
      trial = evaluate(nd, c + step * dc);
      if (std::isfinite(norm(trial)) && norm(trial) < (1.0 - 1e-4 * step) * norm(st)) {
        delta = nd;
        c += step * dc;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw ConvergenceError("dual Newton line search stalled", norm(st));
    st = trial;
  }
  throw ConvergenceError("dual Newton hit the iteration limit", norm(st));
}

}  // namespace wcs::detail
