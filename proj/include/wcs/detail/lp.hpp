#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "wcs/errors.hpp"

namespace wcs::detail {

/**
 * @brief Dense LP: maximize c'z subject to A z (<= or =) b and lower <= z <= upper.
 *
 * Every lower bound must be finite; upper bounds may be infinite. Sized for
 * the few-dozen-row programs produced by the DRO reductions.
 */
struct LinearProgram {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // row-major rows x cols
  std::vector<double> rhs;
  std::vector<bool> equality;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;

  LinearProgram(std::size_t m, std::size_t n)
      : rows(m), cols(n), a(m * n, 0.0), rhs(m, 0.0), equality(m, false), objective(n, 0.0),
        lower(n, 0.0), upper(n, std::numeric_limits<double>::infinity()) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
};

struct LpSolution {
  std::vector<double> z;
  std::vector<double> duals;  // one per row; >= 0 for inequality rows
  double objective = 0.0;
  std::size_t iterations = 0;
};

/**
 * Bounded-variable primal simplex on an explicit tableau.
 *
 * Each row gets a slack (inequality rows) and an artificial column. Phase I
 * drives the artificials to zero, phase II fixes them there. Pricing is
 * Dantzig's rule, switching to Bland's rule after a run of degenerate pivots.
 * The tableau is rebuilt from the original data every hundred pivots
 * and once more before the optimality certificate is accepted.
 */
class BoundedSimplex {
 public:
  explicit BoundedSimplex(const LinearProgram& lp, std::size_t max_iterations = 200000)
      : lp_(lp), max_iterations_(max_iterations) {
    m_ = lp.rows;
    n_struct_ = lp.cols;
    slack_begin_ = n_struct_;
    std::size_t slacks = 0;
    for (std::size_t r = 0; r < m_; ++r)
      if (!lp.equality[r]) ++slacks;
    art_begin_ = slack_begin_ + slacks;
    ncol_ = art_begin_ + m_;

    orig_.assign(m_ * ncol_, 0.0);
    lo_.assign(ncol_, 0.0);
    up_.assign(ncol_, kInfinity);
    cost_.assign(ncol_, 0.0);
    for (std::size_t j = 0; j < n_struct_; ++j) {
      if (!std::isfinite(lp.lower[j])) throw DomainError("LP variables need finite lower bounds");
      if (lp.upper[j] < lp.lower[j]) throw DomainError("LP variable has empty bounds");
      lo_[j] = lp.lower[j];
      up_[j] = lp.upper[j];
      cost_[j] = lp.objective[j];
    }
    std::size_t s = slack_begin_;
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t j = 0; j < n_struct_; ++j) orig_[r * ncol_ + j] = lp.a[r * n_struct_ + j];
      if (!lp.equality[r]) orig_[r * ncol_ + s++] = 1.0;
    }

    x_.assign(ncol_, 0.0);
    for (std::size_t j = 0; j < art_begin_; ++j) x_[j] = lo_[j];
    // Artificial signs make the starting basis feasible.
    for (std::size_t r = 0; r < m_; ++r) {
      double resid = lp.rhs[r];
      for (std::size_t j = 0; j < art_begin_; ++j) resid -= orig_[r * ncol_ + j] * x_[j];
      orig_[r * ncol_ + art_begin_ + r] = resid >= 0.0 ? 1.0 : -1.0;
      x_[art_begin_ + r] = std::abs(resid);
    }
    basis_.resize(m_);
    is_basic_.assign(ncol_, false);
    for (std::size_t r = 0; r < m_; ++r) {
      basis_[r] = art_begin_ + r;
      is_basic_[art_begin_ + r] = true;
    }
    scale_ = 1.0;
    for (double v : lp.objective) scale_ = std::max(scale_, std::abs(v));
  }

  LpSolution solve() {
    std::vector<double> phase1(ncol_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) phase1[art_begin_ + r] = -1.0;
    run(phase1);
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < m_; ++r) infeasibility += x_[art_begin_ + r];
    if (infeasibility > 1e-8 * std::max(1.0, rhs_scale()))
      throw DomainError("linear program is infeasible");
    for (std::size_t r = 0; r < m_; ++r) {
      up_[art_begin_ + r] = 0.0;
      x_[art_begin_ + r] = 0.0;
    }
    run(cost_);

    LpSolution out;
    out.z.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_struct_));
    for (std::size_t j = 0; j < n_struct_; ++j) out.objective += cost_[j] * x_[j];
    // The artificial column of row r is sign_r e_r with zero cost, so its
    // reduced cost is -sign_r y_r.
    out.duals.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      const double sign = orig_[r * ncol_ + art_begin_ + r];
      out.duals[r] = -sign * reduced_[art_begin_ + r];
    }
    out.iterations = iterations_;
    return out;
  }

 private:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();
  static constexpr double kPivotTol = 1e-9;

  double rhs_scale() const {
    double s = 0.0;
    for (double v : lp_.rhs) s = std::max(s, std::abs(v));
    return s;
  }

  double& t(std::size_t r, std::size_t c) { return tab_[r * ncol_ + c]; }

  /// Rebuilds B^{-1} A, basic values and reduced costs from the original data.
  void refactor() {
    tab_ = orig_;
    std::vector<double> rhs(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      double v = lp_.rhs[r];
      for (std::size_t j = 0; j < ncol_; ++j)
        if (!is_basic_[j]) v -= orig_[r * ncol_ + j] * x_[j];
      rhs[r] = v;
    }
    std::vector<std::size_t> cols = basis_;
    for (std::size_t k = 0; k < m_; ++k) {
      const std::size_t col = cols[k];
      std::size_t piv = k;
      for (std::size_t r = k + 1; r < m_; ++r)
        if (std::abs(t(r, col)) > std::abs(t(piv, col))) piv = r;
      if (std::abs(t(piv, col)) < 1e-12) throw ConvergenceError("simplex basis became singular", t(piv, col));
      if (piv != k) {
        for (std::size_t j = 0; j < ncol_; ++j) std::swap(t(k, j), t(piv, j));
        std::swap(rhs[k], rhs[piv]);
      }
      const double inv = 1.0 / t(k, col);
      for (std::size_t j = 0; j < ncol_; ++j) t(k, j) *= inv;
      rhs[k] *= inv;
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == k) continue;
        const double f = t(r, col);
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < ncol_; ++j) t(r, j) -= f * t(k, j);
        rhs[r] -= f * rhs[k];
      }
      basis_[k] = col;
    }
    for (std::size_t r = 0; r < m_; ++r) x_[basis_[r]] = rhs[r];
    compute_reduced();
  }

  void compute_reduced() {
    reduced_.assign(ncol_, 0.0);
    for (std::size_t j = 0; j < ncol_; ++j) {
      double d = (*phase_cost_)[j];
      for (std::size_t r = 0; r < m_; ++r) d -= (*phase_cost_)[basis_[r]] * t(r, j);
      reduced_[j] = is_basic_[j] ? 0.0 : d;
    }
  }

  /// Direction in which column j can improve the objective, or 0.
  int improving(std::size_t j, double tol) const {
    if (is_basic_[j] || up_[j] - lo_[j] <= 0.0) return 0;
    const double d = reduced_[j];
    if (d > tol && x_[j] < up_[j]) return 1;
    if (d < -tol && x_[j] > lo_[j]) return -1;
    return 0;
  }

  void run(const std::vector<double>& cost) {
    phase_cost_ = &cost;
    refactor();
    const double tol = 1e-11 * scale_;
    std::size_t since_refactor = 0;
    std::size_t degenerate_run = 0;
    bool bland = false;
    for (;;) {
      if (iterations_++ > max_iterations_) throw ConvergenceError("simplex iteration limit reached", 0.0);
      std::size_t enter = ncol_;
      int dir = 0;
      double best = 0.0;
      for (std::size_t j = 0; j < ncol_; ++j) {
        const int s = improving(j, tol);
        if (s == 0) continue;
        if (bland) {
          enter = j;
          dir = s;
          break;
        }
        const double score = std::abs(reduced_[j]);
        if (score > best) {
          best = score;
          enter = j;
          dir = s;
        }
      }
      if (enter == ncol_) {
        // Confirm optimality on a freshly rebuilt tableau.
        if (since_refactor == 0) return;
        refactor();
        since_refactor = 0;
        continue;
      }

      // Ratio test; among near-ties prefer the largest pivot.
      double theta = up_[enter] - lo_[enter];
      std::size_t leave = m_;
      for (int pass = 0; pass < 2; ++pass) {
        const double limit = theta;
        double best_pivot = 0.0;
        for (std::size_t r = 0; r < m_; ++r) {
          const double alpha = dir * t(r, enter);
          const std::size_t b = basis_[r];
          double ratio;
          if (alpha > kPivotTol) ratio = (x_[b] - lo_[b]) / alpha;
          else if (alpha < -kPivotTol && std::isfinite(up_[b])) ratio = (up_[b] - x_[b]) / -alpha;
          else continue;
          ratio = std::max(ratio, 0.0);
          if (pass == 0) {
            if (ratio < theta) theta = ratio;
          } else if (ratio <= limit + 1e-12 && std::abs(alpha) > best_pivot) {
            best_pivot = std::abs(alpha);
            leave = r;
          }
        }
        if (pass == 0 && !std::isfinite(theta)) throw DomainError("linear program is unbounded");
        if (pass == 0 && theta == up_[enter] - lo_[enter]) break;  // bound flip
      }

      degenerate_run = theta == 0.0 ? degenerate_run + 1 : 0;
      bland = degenerate_run > 50;
      for (std::size_t r = 0; r < m_; ++r) x_[basis_[r]] -= theta * dir * t(r, enter);
      x_[enter] += theta * dir;
      if (leave == m_) {
        x_[enter] = dir > 0 ? up_[enter] : lo_[enter];
        continue;
      }
      pivot(leave, enter);
      if (++since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  void pivot(std::size_t r, std::size_t enter) {
    const std::size_t out = basis_[r];
    const double alpha = t(r, enter);
    // Snap the leaving variable to the bound it reached.
    x_[out] = std::abs(x_[out] - lo_[out]) <= std::abs(x_[out] - up_[out]) ? lo_[out] : up_[out];
    const double inv = 1.0 / alpha;
    for (std::size_t j = 0; j < ncol_; ++j) t(r, j) *= inv;
    for (std::size_t k = 0; k < m_; ++k) {
      if (k == r) continue;
      const double f = t(k, enter);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < ncol_; ++j) t(k, j) -= f * t(r, j);
    }
    const double f = reduced_[enter];
    for (std::size_t j = 0; j < ncol_; ++j) reduced_[j] -= f * t(r, j);
    is_basic_[out] = false;
    is_basic_[enter] = true;
    basis_[r] = enter;
    reduced_[enter] = 0.0;
  }

  static constexpr std::size_t kRefactorEvery = 100;

  const LinearProgram& lp_;
  std::size_t max_iterations_;
  std::size_t m_ = 0, n_struct_ = 0, slack_begin_ = 0, art_begin_ = 0, ncol_ = 0;
  std::vector<double> orig_, tab_, lo_, up_, cost_, x_, reduced_;
  std::vector<std::size_t> basis_;
  std::vector<bool> is_basic_;
  const std::vector<double>* phase_cost_ = nullptr;
  std::size_t iterations_ = 0;
  double scale_ = 1.0;
};

inline LpSolution solve_lp(const LinearProgram& lp) { return BoundedSimplex(lp).solve(); }

}  // namespace wcs::detail
