#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "wcs/dro.hpp"
#include "wcs/models.hpp"
#include "wcs/report.hpp"

namespace wcs::experiments {

using report::json;

/// Named text outputs plus a summary document. Writing them is left to the caller.
struct ExperimentOutput {
  std::vector<std::pair<std::string, std::string>> files;
  json summary;

  const std::string* file(const std::string& name) const {
    for (const auto& [k, v] : files)
      if (k == name) return &v;
    return nullptr;
  }
};

inline void write_outputs(const ExperimentOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ParseError("cannot write '" + (dir / name).string() + "'", 0, 0);
    f << text;
  };
  for (const auto& [name, text] : out.files) put(name, text);
  put("summary.json", out.summary.dump(2) + "\n");
}

/// Weighted median: the midpoint when the cumulative mass hits 1/2 exactly on an atom boundary.
inline double median(const DiscreteDistribution& d) {
  double cum = 0.0;
  for (std::size_t r = d.size(); r-- > 0;) {
    cum += d.sorted_prob(r);
    if (std::abs(cum - 0.5) <= 1e-12 && r > 0) return 0.5 * (d.sorted_value(r) + d.sorted_value(r - 1));
    if (cum > 0.5) return d.sorted_value(r);
  }
  return max_value(d);
}

struct ShapeCheck {
  std::size_t steps = 0;       // consecutive pairs of distinct decisions compared
  std::size_t violations = 0;  // pairs where mean fell or sensitivity rose
  bool holds() const { return steps > 0 && violations == 0; }
};

/**
 * @brief Along increasing eps, nominal rises strictly and `measure` falls strictly.
 *
 * Radii that return the same decision as the previous one are skipped: the
 * grid solver is exact to 1e-8 in x, so repeated decisions carry no shape
 * information.
 */
inline ShapeCheck frontier_shape(const std::vector<FrontierPoint>& pts, const std::string& measure) {
  ShapeCheck out;
  const FrontierPoint* prev = nullptr;
  for (const auto& p : pts) {
    if (p.error || !p.sensitivity(measure)) continue;
    if (prev != nullptr) {
      double shift = 0.0;
      for (std::size_t j = 0; j < p.decision.size(); ++j) shift = std::max(shift, std::abs(p.decision[j] - prev->decision[j]));
      if (shift <= 1e-7) continue;
      ++out.steps;
      if (!(p.nominal > prev->nominal && *p.sensitivity(measure) < *prev->sensitivity(measure))) ++out.violations;
    }
    prev = &p;
  }
  return out;
}

struct DominanceGap {
  double gap = 0.0;         // max over matched points of own(nominal) - other sensitivity
  std::size_t matched = 0;  // points of `other` inside the nominal range of `own`
};

/// How far `own` sits above `other` under `measure` at matched nominal values, by linear interpolation.
inline DominanceGap dominance_gap(const std::vector<FrontierPoint>& own, const std::vector<FrontierPoint>& other,
                                  const std::string& measure) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : own)
    if (!p.error && p.sensitivity(measure)) xy.emplace_back(p.nominal, *p.sensitivity(measure));
  DominanceGap out;
  bool any = false;
  for (const auto& p : other) {
    if (p.error || !p.sensitivity(measure)) continue;
    const auto v = interpolate(xy, p.nominal);
    if (!v) continue;
    const double g = *v - *p.sensitivity(measure);
    out.gap = any ? std::max(out.gap, g) : g;
    any = true;
    ++out.matched;
  }
  return out;
}

inline json point_json(const FrontierPoint& p) {
  json j;
  j["eps"] = p.eps;
  j["decision"] = p.decision;
  j["nominal"] = p.nominal;
  j["robust_value"] = p.robust_value;
  json s = json::object();
  for (const auto& [k, v] : p.sensitivities) s[k] = v;
  j["sensitivities"] = s;
  return j;
}

struct InventoryConfig {
  std::uint64_t seed = 7;
  std::size_t n = 100;
  double mu_low = 10.0;
  double mu_high = 100.0;
  double w_low = 0.9;
  InventoryParams params;
  double chi2_eps = 1.7;
  double budgeted_eps = 0.45;
  std::size_t frontier_points = 12;
  std::size_t grid_size = 512;
  std::size_t bins = 20;
};

/**
 * @brief Newsvendor study: SAA against chi-square and budgeted robust orders.
 *
 * Emits the two frontiers, a histogram of the cost distribution under each of
 * the three orders, and a summary with the orders and the frontier diagnostics.
 */
inline ExperimentOutput run_inventory(const InventoryConfig& cfg = {}) {
  const std::vector<double> demand = exp_mixture_demand(cfg.n, cfg.mu_low, cfg.mu_high, cfg.w_low, cfg.seed);
  const DecisionProblem prob = inventory_problem(cfg.params, demand);
  const SmoothPhi chi2 = modified_chi2();
  const std::vector<UncertaintySetSpec> measures{chi2, Budgeted{}, TotalVariation{}};
  FrontierOptions fo;
  fo.grid_size = cfg.grid_size;

  const ScalarSolution saa = solve_scalar(prob, chi2, 0.0, cfg.grid_size);
  const ScalarSolution rob = solve_scalar(prob, chi2, cfg.chi2_eps, cfg.grid_size);
  const ScalarSolution bud = solve_scalar(prob, Budgeted{}, cfg.budgeted_eps, cfg.grid_size);

  const auto chi_grid = default_eps_grid(chi2, cfg.chi2_eps, cfg.frontier_points);
  const auto bud_grid = default_eps_grid(Budgeted{}, cfg.budgeted_eps, cfg.frontier_points);
  const auto chi_front = frontier(prob, chi2, chi_grid, measures, fo);
  const auto bud_front = frontier(prob, Budgeted{}, bud_grid, measures, fo);

  const DiscreteDistribution d_saa = induced_cost_distribution(prob, saa.x);
  const DiscreteDistribution d_chi = induced_cost_distribution(prob, rob.x);
  const DiscreteDistribution d_bud = induced_cost_distribution(prob, bud.x);
  const report::Histogram hist = report::histogram({{"saa", d_saa}, {"chi2", d_chi}, {"budgeted", d_bud}}, cfg.bins);

  ExperimentOutput out;
  out.files.emplace_back("frontier_chi2.csv", report::frontier_csv(chi_front, "mean"));
  out.files.emplace_back("frontier_budgeted.csv", report::frontier_csv(bud_front, "mean"));
  out.files.emplace_back("frontier_chi2.svg", report::frontier_svg({{"chi2", chi_front}, {"budgeted", bud_front}}, "chi2", "mean"));
  out.files.emplace_back("cost_histogram.csv", report::histogram_csv(hist));
  out.files.emplace_back("cost_histogram.svg", report::histogram_svg(hist, "cost"));

  const ShapeCheck shape = frontier_shape(chi_front, "chi2");
  json& s = out.summary;
  s["schema_version"] = report::schema_version;
  s["experiment"] = "inventory";
  s["seed"] = cfg.seed;
  s["demand"] = {{"n", cfg.n}, {"mu_low", cfg.mu_low}, {"mu_high", cfg.mu_high}, {"w_low", cfg.w_low}};
  s["prices"] = {{"r", cfg.params.r}, {"c", cfg.params.c}, {"q", cfg.params.q}, {"s", cfg.params.s}};
  s["x_saa"] = saa.x;
  s["x_chi2"] = rob.x;
  s["eps_chi2"] = cfg.chi2_eps;
  s["x_budgeted"] = bud.x;
  s["eps_budgeted"] = cfg.budgeted_eps;
  s["ordering"] = {{"weak", bud.x <= saa.x && saa.x <= rob.x}, {"strict", bud.x < saa.x && saa.x < rob.x}};
  s["saa_cost"] = {{"mean", mean(d_saa)}, {"median", median(d_saa)}, {"right_skewed", mean(d_saa) > median(d_saa)}};
  s["chi2_frontier_shape"] = {{"steps", shape.steps}, {"violations", shape.violations}, {"holds", shape.holds()}};
  return out;
}

struct PortfolioConfig {
  std::optional<std::string> returns_path;  // otherwise synthetic data
  double scale = 1.0;
  std::uint64_t seed = 7;
  std::size_t n = 1000;
  std::size_t d = 30;
  double beta = 0.9;
  double tv_max = 0.1;
  std::size_t tv_points = 21;
  double budgeted_max = 1.0;
  std::size_t budgeted_points = 21;
  double chi2_max = 0.5;
  std::size_t chi2_points = 10;
  double tv_eps = 0.004;
  double budgeted_eps = 0.15;
  SimplexOptions simplex = [] {
    SimplexOptions o;
    o.restarts = 5;
    return o;
  }();
  std::size_t bins = 30;
};

/**
 * @brief Minimum-CVaR portfolios under TV, budgeted, and chi-square sets.
 *
 * Every frontier decision is scored by all three tail sensitivities so the
 * families can be compared at matched CVaR. The summary records the worst
 * interpolated gaps and the sensitivities of the two single robust solutions
 * against the SAA portfolio.
 */
inline ExperimentOutput run_portfolio(const PortfolioConfig& cfg = {}) {
  const ReturnsMatrix R = cfg.returns_path ? load_returns_csv(*cfg.returns_path, cfg.scale)
                                           : synthetic_returns(cfg.n, cfg.d, cfg.seed);
  const RiskLevel beta(cfg.beta);
  const DecisionProblem prob = portfolio_problem(R, beta);
  const SmoothPhi chi2 = modified_chi2();
  const std::vector<UncertaintySetSpec> measures{TotalVariation{}, Budgeted{}, chi2};
  FrontierOptions fo;
  fo.simplex = cfg.simplex;

  const auto tv_front = frontier(prob, TotalVariation{}, default_eps_grid(TotalVariation{}, cfg.tv_max, cfg.tv_points), measures, fo);
  const auto bud_front = frontier(prob, Budgeted{}, default_eps_grid(Budgeted{}, cfg.budgeted_max, cfg.budgeted_points), measures, fo);
  const auto chi_front = frontier(prob, chi2, default_eps_grid(chi2, cfg.chi2_max, cfg.chi2_points), measures, fo);

  const auto single = [&](const UncertaintySetSpec& spec, double eps) {
    return frontier(prob, spec, std::vector<double>{eps}, measures, fo).front();
  };
  const FrontierPoint saa = tv_front.front();
  const FrontierPoint tv_pt = single(TotalVariation{}, cfg.tv_eps);
  const FrontierPoint bud_pt = single(Budgeted{}, cfg.budgeted_eps);

  ExperimentOutput out;
  out.files.emplace_back("frontier_tv.csv", report::frontier_csv(tv_front, "cvar", R.names));
  out.files.emplace_back("frontier_budgeted.csv", report::frontier_csv(bud_front, "cvar", R.names));
  out.files.emplace_back("frontier_chi2.csv", report::frontier_csv(chi_front, "cvar", R.names));
  const std::vector<std::pair<std::string, std::vector<FrontierPoint>>> all{
      {"tv", tv_front}, {"budgeted", bud_front}, {"chi2", chi_front}};
  out.files.emplace_back("frontier_tv.svg", report::frontier_svg(all, "tv", "cvar"));
  out.files.emplace_back("frontier_budgeted.svg", report::frontier_svg(all, "budgeted", "cvar"));

  std::vector<std::pair<std::string, DiscreteDistribution>> series;
  for (const auto* p : {&saa, &tv_pt, &bud_pt})
    if (!p->error) series.emplace_back(p == &saa ? "saa" : p == &tv_pt ? "tv" : "budgeted",
                                       induced_cost_distribution(prob, p->decision));
  if (!series.empty()) {
    const report::Histogram hist = report::histogram(series, cfg.bins);
    out.files.emplace_back("loss_histogram.csv", report::histogram_csv(hist));
    out.files.emplace_back("loss_histogram.svg", report::histogram_svg(hist, "loss"));
  }

  json& s = out.summary;
  s["schema_version"] = report::schema_version;
  s["experiment"] = "portfolio";
  s["data"] = cfg.returns_path ? json{{"source", "file"}, {"path", *cfg.returns_path}, {"scale", cfg.scale}}
                               : json{{"source", "synthetic"}, {"seed", cfg.seed}};
  s["scenarios"] = R.n;
  s["assets"] = R.d;
  s["beta"] = cfg.beta;
  const auto gap_json = [](const DominanceGap& g) { return json{{"gap", g.gap}, {"matched", g.matched}}; };
  s["dominance"] = {
      {"tv_over_budgeted_under_tv", gap_json(dominance_gap(tv_front, bud_front, "tv"))},
      {"tv_over_chi2_under_tv", gap_json(dominance_gap(tv_front, chi_front, "tv"))},
      {"budgeted_over_tv_under_budgeted", gap_json(dominance_gap(bud_front, tv_front, "budgeted"))},
      {"budgeted_over_chi2_under_budgeted", gap_json(dominance_gap(bud_front, chi_front, "budgeted"))}};
  const auto pt_json = [](const FrontierPoint& p) {
    if (p.error) return json{{"eps", p.eps}, {"error", *p.error}};
    return point_json(p);
  };
  s["saa"] = pt_json(saa);
  s["tv_solution"] = pt_json(tv_pt);
  s["budgeted_solution"] = pt_json(bud_pt);
  std::size_t failures = 0;
  for (const auto* f : {&tv_front, &bud_front, &chi_front})
    failures += static_cast<std::size_t>(std::count_if(f->begin(), f->end(), [](const auto& p) { return p.error.has_value(); }));
  s["failed_points"] = failures;
  return out;
}

}  // namespace wcs::experiments
