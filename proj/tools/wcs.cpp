// Command-line front end: sensitivities, worst cases, frontiers, the two
// reference experiments, and the comparison bounds.
//
// Exit codes: 0 ok, 1 computation failure, 2 usage error (bad flag or input file).

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wcs/wcs.hpp"

namespace {

using namespace wcs;
using report::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FamilyFlags {
  std::string family;
  std::optional<double> alpha;
  std::optional<double> phi_dd;
};

UncertaintySetSpec parse_family(const std::string& name, const FamilyFlags& f) {
  const double dd = f.phi_dd.value_or(1.0);
  if (name == "tv") return TotalVariation{};
  if (name == "budgeted") return Budgeted{};
  if (name == "chi2") return modified_chi2(dd);
  if (name == "kl") return kullback_leibler(dd);
  if (name == "symmetric") return Symmetric{};
  if (name == "cc") {
    if (!f.alpha) throw UsageError("--family cc needs --alpha");
    return ConvexCombination{RiskLevel(*f.alpha)};
  }
  if (name == "wasserstein")
    throw UsageError("--family wasserstein needs a cost function; use the library API");
  throw UsageError("--family: unknown family '" + name + "' (expected tv, budgeted, chi2, kl, cc, symmetric)");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto cell : csv::split(s)) out.emplace_back(cell);
  return out;
}

DiscreteDistribution read_input(const std::string& path) {
  try {
    return read_distribution_csv(path);
  } catch (const ParseError& e) {
    throw UsageError(std::string("--input: ") + e.what());
  }
}

ReturnsMatrix read_matrix(const std::string& flag, const std::string& path, double scale) {
  try {
    return load_returns_csv(path, scale);
  } catch (const ParseError& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

void add_format(CLI::App* cmd, std::string& format, std::vector<std::string> allowed) {
  cmd->add_option("--format", format, "Output format")->check(CLI::IsMember(std::move(allowed)));
}

void add_family_flags(CLI::App* cmd, FamilyFlags& f, std::optional<double>& beta) {
  cmd->add_option("--family", f.family, "tv, budgeted, chi2, kl, cc or symmetric")->required();
  cmd->add_option("--alpha", f.alpha, "Tail level of the convex-combination set");
  cmd->add_option("--beta", beta, "Score CVaR at this level instead of the mean");
  cmd->add_option("--phi-dd", f.phi_dd, "phi''(1) for smooth divergences (default 1)");
}

void emit_files(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : files) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw UsageError("--out: cannot write '" + (dir / name).string() + "'");
    f << text;
  }
}

// A mixing problem over the columns of a cost matrix: decision weights on the simplex.
DecisionProblem custom_problem(const ReturnsMatrix& costs, std::optional<double> beta) {
  DecisionProblem prob;
  AffineCost aff;
  aff.dim = costs.d;
  aff.intercept.assign(costs.n, 0.0);
  aff.slope = costs.data;
  for (std::size_t i = 0; i < costs.n; ++i)
    prob.scenarios.emplace_back(costs.data.begin() + static_cast<std::ptrdiff_t>(i * costs.d),
                                costs.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * costs.d));
  prob.probs.assign(costs.n, 1.0 / static_cast<double>(costs.n));
  prob.cost = [](std::span<const double> x, std::span<const double> y) {
    double c = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) c += y[j] * x[j];
    return c;
  };
  prob.domain = Simplex{costs.d};
  if (beta) prob.objective = CVaRObjective{RiskLevel(*beta)};
  prob.affine = std::move(aff);
  validate(prob);
  return prob;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case sensitivity and distributionally robust decisions"};
  app.require_subcommand(1);

  // sensitivity / worst-case
  FamilyFlags fam;
  std::optional<double> beta;
  std::string input, format = "json";
  double eps = 0.0;
  auto* sens = app.add_subcommand("sensitivity", "Worst-case sensitivity of a cost distribution");
  sens->add_option("--input", input, "Distribution CSV (value,prob or value)")->required();
  add_family_flags(sens, fam, beta);
  add_format(sens, format, {"json", "csv"});
  auto* wc = app.add_subcommand("worst-case", "Worst-case expected cost (or CVaR) at radius eps");
  wc->add_option("--input", input, "Distribution CSV (value,prob or value)")->required();
  wc->add_option("--eps", eps, "Radius")->required();
  add_family_flags(wc, fam, beta);
  add_format(wc, format, {"json", "csv"});

  // frontier
  std::string model, families = "tv,budgeted,chi2", measures = "chi2,tv,budgeted,cc,symmetric", eps_grid, returns,
      out_dir;
  std::optional<double> max_eps;
  std::size_t points = 11;
  std::uint64_t seed = 7;
  bool percent = false, synthetic = false, svg = false;
  auto* fr = app.add_subcommand("frontier", "Sweep eps and score each decision under every family");
  fr->add_option("--model", model, "inventory, portfolio or custom")
      ->required()
      ->check(CLI::IsMember({"inventory", "portfolio", "custom"}));
  fr->add_option("--families", families, "Comma-separated families to solve with");
  fr->add_option("--measures", measures,
                 "Comma-separated families to score every decision with, besides the solved ones "
                 "(cc uses --alpha, 0.9 when absent)");
  fr->add_option("--eps-grid", eps_grid, "Comma-separated increasing radii (overrides --max-eps/--points)");
  fr->add_option("--max-eps", max_eps, "Largest radius of the default grids");
  fr->add_option("--points", points, "Points per default grid")->check(CLI::Range(2, 1000));
  fr->add_option("--seed", seed, "Seed for generated demand or returns");
  fr->add_option("--input", input, "inventory: demand samples; custom: cost matrix CSV (one column per alternative)");
  fr->add_option("--returns", returns, "portfolio: returns CSV");
  fr->add_flag("--percent", percent, "Returns are in percent; divide by 100");
  fr->add_flag("--synthetic", synthetic, "portfolio: use the seeded synthetic returns");
  fr->add_option("--alpha", fam.alpha, "Tail level for cc");
  fr->add_option("--beta", beta, "CVaR level of the objective (portfolio default 0.9)");
  fr->add_option("--phi-dd", fam.phi_dd, "phi''(1) for smooth divergences");
  fr->add_option("--out", out_dir, "Output directory")->required();
  fr->add_flag("--svg", svg, "Also write SVG frontier plots");

  // experiment
  std::string which;
  auto* ex = app.add_subcommand("experiment", "Run a reference study end to end");
  ex->add_option("name", which, "inventory or portfolio")->required()->check(CLI::IsMember({"inventory", "portfolio"}));
  ex->add_option("--seed", seed, "Seed for demand or synthetic returns");
  ex->add_option("--returns", returns, "portfolio: returns CSV");
  ex->add_flag("--percent", percent, "Returns are in percent; divide by 100");
  ex->add_flag("--synthetic", synthetic, "portfolio: use the seeded synthetic returns");
  ex->add_option("--out", out_dir, "Output directory")->required();

  // bounds
  std::optional<double> alpha;
  std::optional<std::size_t> n;
  auto* bd = app.add_subcommand("bounds", "Comparison constant and dominance checks");
  bd->add_option("--alpha", alpha, "CVaR level")->required();
  bd->add_option("--n", n, "Number of equally weighted atoms");
  bd->add_option("--input", input, "Equally weighted distribution CSV to check");
  bd->add_option("--phi-dd", fam.phi_dd, "phi''(1) (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sens->parsed() || wc->parsed()) {
      const UncertaintySetSpec spec = parse_family(fam.family, fam);
      const DiscreteDistribution d = read_input(input);
      std::optional<RiskLevel> level;
      if (beta) level = RiskLevel(*beta);
      if (sens->parsed()) {
        const Sensitivity s = level ? rcvar_sensitivity(d, *level, spec) : sensitivity(d, spec);
        if (format == "csv")
          std::cout << "family,value,growth\n"
                    << measure_label(spec) << ',' << csv::format_number(s.value) << ',' << growth_name(s.growth) << '\n';
        else
          std::cout << report::sensitivity_json(spec, s).dump() << '\n';
      } else {
        const WorstCaseResult r = level ? rcvar_value(d, *level, spec, eps) : worst_case(d, spec, eps);
        if (format == "csv") {
          std::cout << "value,prob,weight\n";
          for (std::size_t i = 0; i < d.size(); ++i)
            std::cout << csv::format_number(d.value(i)) << ',' << csv::format_number(d.prob(i)) << ','
                      << (i < r.weights.size() ? csv::format_number(r.weights[i]) : "") << '\n';
          std::cout << "# worst-case value," << csv::format_number(r.value) << '\n';
        } else {
          std::cout << report::worst_case_json(spec, eps, r).dump() << '\n';
        }
      }
      return 0;
    }

    if (fr->parsed()) {
      std::vector<UncertaintySetSpec> specs;
      for (const auto& name : split_list(families)) specs.push_back(parse_family(name, fam));
      if (specs.empty()) throw UsageError("--families: no family given");
      std::vector<UncertaintySetSpec> scoring = specs;
      FamilyFlags score_flags = fam;
      if (!score_flags.alpha) score_flags.alpha = 0.9;
      for (const auto& name : split_list(measures)) {
        const UncertaintySetSpec m = parse_family(name, score_flags);
        const bool seen = std::any_of(scoring.begin(), scoring.end(),
                                      [&](const auto& x) { return measure_label(x) == measure_label(m); });
        if (!seen) scoring.push_back(m);
      }
      DecisionProblem prob;
      std::vector<std::string> names;
      std::string nominal = "mean";
      if (model == "inventory") {
        std::vector<double> demand;
        if (!input.empty()) {
          const DiscreteDistribution d = read_input(input);
          demand.assign(d.values().begin(), d.values().end());
        } else {
          demand = exp_mixture_demand(100, 10.0, 100.0, 0.9, seed);
        }
        prob = inventory_problem(InventoryParams{}, demand);
      } else if (model == "portfolio") {
        if (returns.empty() && !synthetic) throw UsageError("--returns: portfolio needs a returns file or --synthetic");
        const ReturnsMatrix r = synthetic ? synthetic_returns(1000, 30, seed)
                                          : read_matrix("--returns", returns, percent ? 0.01 : 1.0);
        prob = portfolio_problem(r, RiskLevel(beta.value_or(0.9)));
        names = r.names;
        nominal = "cvar";
      } else {
        if (input.empty()) throw UsageError("--input: custom model needs a cost matrix CSV");
        const ReturnsMatrix c = read_matrix("--input", input, 1.0);
        prob = custom_problem(c, beta);
        names = c.names;
        if (beta) nominal = "cvar";
      }
      std::vector<double> fixed;
      if (!eps_grid.empty()) {
        for (const auto& cell : split_list(eps_grid)) {
          try {
            fixed.push_back(csv::parse_number(cell, 0, 0));
          } catch (const ParseError&) {
            throw UsageError("--eps-grid: '" + cell + "' is not a number");
          }
        }
        for (std::size_t k = 1; k < fixed.size(); ++k)
          if (!(fixed[k] > fixed[k - 1])) throw UsageError("--eps-grid: radii must be increasing");
      }
      json summary;
      summary["schema_version"] = report::schema_version;
      summary["model"] = model;
      if ((model == "inventory" && input.empty()) || (model == "portfolio" && synthetic)) summary["seed"] = seed;
      json fams = json::array();
      std::vector<std::pair<std::string, std::string>> files;
      std::vector<std::pair<std::string, std::vector<FrontierPoint>>> all;
      for (const auto& spec : specs) {
        const double top = max_eps.value_or(growth_of(spec) == Growth::Sqrt ? 1.0 : 0.5);
        const auto grid = fixed.empty() ? default_eps_grid(spec, top, points) : fixed;
        auto pts = frontier(prob, spec, grid, scoring);
        const std::string label = measure_label(spec);
        files.emplace_back("frontier_" + label + ".csv", report::frontier_csv(pts, nominal, names));
        std::size_t failed = 0;
        for (const auto& p : pts) failed += p.error ? 1 : 0;
        fams.push_back({{"family", label}, {"points", pts.size()}, {"failed", failed},
                        {"file", "frontier_" + label + ".csv"}});
        all.emplace_back(label, std::move(pts));
      }
      if (svg)
        for (const auto& spec : specs)
          files.emplace_back("frontier_" + measure_label(spec) + ".svg",
                             report::frontier_svg(all, measure_label(spec), nominal));
      emit_files(out_dir, files);
      summary["families"] = fams;
      std::cout << summary.dump(2) << '\n';
      return 0;
    }

    if (ex->parsed()) {
      experiments::ExperimentOutput out;
      if (which == "inventory") {
        experiments::InventoryConfig cfg;
        cfg.seed = seed;
        out = experiments::run_inventory(cfg);
      } else {
        if (returns.empty() && !synthetic)
          throw UsageError("--returns: the portfolio experiment needs a returns CSV (header of asset names, one "
                           "month per row); pass --synthetic to use generated data");
        experiments::PortfolioConfig cfg;
        cfg.seed = seed;
        if (!synthetic) {
          read_matrix("--returns", returns, 1.0);
          cfg.returns_path = returns;
          cfg.scale = percent ? 0.01 : 1.0;
        }
        out = experiments::run_portfolio(cfg);
      }
      experiments::write_outputs(out, out_dir);
      std::cout << out.summary.dump(2) << '\n';
      return 0;
    }

    if (bd->parsed()) {
      const RiskLevel a(*alpha);
      json j;
      j["schema_version"] = report::schema_version;
      j["alpha"] = a.value();
      if (!input.empty()) {
        const DiscreteDistribution d = read_input(input);
        const auto r = check_dominance(d, fam.phi_dd.value_or(1.0), a);
        j["n"] = d.size();
        j["c_alpha_n"] = r.c_alpha_n;
        j["stdev"] = r.stdev;
        j["tv"] = r.tv;
        j["cvar_deviation"] = r.cvar_deviation;
        j["budgeted"] = r.budgeted;
        j["tv_bound"] = r.tv_bound;
        j["cvar_bound"] = r.cvar_bound;
        j["budgeted_bound"] = r.budgeted_bound;
      } else {
        if (!n) throw UsageError("--n: give --n or --input");
        const auto e = extremal_vector(a, *n);
        j["n"] = *n;
        j["c_alpha_n"] = c_alpha_n(a, *n);
        j["extremal_vector"] = std::vector<double>(e.distribution.values().begin(), e.distribution.values().end());
        j["degenerate"] = e.degenerate;
      }
      std::cout << j.dump(2) << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
