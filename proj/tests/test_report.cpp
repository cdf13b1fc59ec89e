#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "wcs/experiments.hpp"

using Catch::Approx;
using namespace wcs;
using namespace wcs::experiments;

namespace {

FrontierPoint point(double eps, double x, double nominal, double sens) {
  FrontierPoint p;
  p.eps = eps;
  p.decision = {x};
  p.nominal = nominal;
  p.robust_value = nominal + sens * eps;
  p.sensitivities = {{"tv", sens}};
  return p;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("frontier CSV layout", "[report]") {
  std::vector<FrontierPoint> pts{point(0.0, 1.0, 2.0, 3.0), point(0.5, 1.5, 2.5, 2.0)};
  FrontierPoint bad;
  bad.eps = 1.0;
  bad.error = "solver failed, twice";
  pts.push_back(bad);
  const std::string csv = report::frontier_csv(pts, "mean");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "eps,x,mean,robust_value,tv_sensitivity,error");
  std::getline(in, line);
  CHECK(line == "0,1,2,2,3,");
  std::getline(in, line);
  CHECK(line == "0.5,1.5,2.5,3.5,2,");
  std::getline(in, line);
  CHECK(line == "1,,,,,solver failed; twice");
}

TEST_CASE("histograms", "[report]") {
  const auto a = DiscreteDistribution::empirical({0, 1, 2, 3});
  const auto b = DiscreteDistribution({10}, {1.0});
  const auto h = report::histogram({{"a", a}, {"b", b}}, 5);
  REQUIRE(h.edges.size() == 6);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == 10.0);
  for (const auto& m : h.mass) CHECK(std::accumulate(m.begin(), m.end(), 0.0) == Approx(1.0).epsilon(1e-15));
  CHECK(h.mass[0][0] == 0.5);
  CHECK(h.mass[0][1] == 0.5);
  CHECK(h.mass[1][4] == 1.0);
  CHECK(count_lines(report::histogram_csv(h)) == 6);
  const std::string svg = report::histogram_svg(h, "cost");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("JSON documents carry the schema version", "[report]") {
  const auto d = DiscreteDistribution::empirical({1, 2, 3});
  const auto s = report::sensitivity_json(TotalVariation{}, sensitivity(d, TotalVariation{}));
  CHECK(s["schema_version"] == report::schema_version);
  CHECK(s["value"] == 1.0);
  CHECK(s["growth"] == "linear");
  const auto w = report::worst_case_json(Budgeted{}, 0.2, worst_case(d, Budgeted{}, 0.2));
  CHECK(w["family"] == "budgeted");
  CHECK(w["weights"].size() == 3);
}

TEST_CASE("median and frontier diagnostics", "[report]") {
  CHECK(median(DiscreteDistribution::empirical({4, 1, 3, 2})) == 2.5);
  CHECK(median(DiscreteDistribution::empirical({4, 1, 3})) == 3.0);
  CHECK(median(DiscreteDistribution({1, 5}, {0.7, 0.3})) == 1.0);

  const std::vector<FrontierPoint> good{point(0, 1, 1.0, 5.0), point(0.1, 1, 1.0, 5.0), point(0.2, 2, 1.5, 4.0),
                                        point(0.3, 3, 2.0, 3.5)};
  const auto shape = frontier_shape(good, "tv");
  CHECK(shape.steps == 2);
  CHECK(shape.holds());
  auto bent = good;
  bent.push_back(point(0.4, 4, 3.0, 3.6));
  CHECK(frontier_shape(bent, "tv").violations == 1);

  const std::vector<FrontierPoint> lower{point(0, 0, 1.0, 4.0), point(1, 0, 2.0, 3.0)};
  const std::vector<FrontierPoint> upper{point(0, 0, 1.5, 4.0), point(1, 0, 3.0, 1.0)};
  const auto g = dominance_gap(lower, upper, "tv");
  CHECK(g.matched == 1);
  CHECK(g.gap == Approx(3.5 - 4.0).epsilon(1e-15));
}

TEST_CASE("inventory experiment is deterministic and ordered", "[experiments]") {
  const auto a = run_inventory();
  const auto b = run_inventory();
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t k = 0; k < a.files.size(); ++k) CHECK(a.files[k] == b.files[k]);
  CHECK(a.summary.dump() == b.summary.dump());
  const auto& s = a.summary;
  CHECK(s["schema_version"] == report::schema_version);
  CHECK(s["x_budgeted"].get<double>() <= s["x_saa"].get<double>());
  CHECK(s["x_saa"].get<double>() <= s["x_chi2"].get<double>());
  const std::string* front = a.file("frontier_chi2.csv");
  REQUIRE(front != nullptr);
  CHECK(count_lines(*front) == 13);
  // The eps = 0 row is the SAA solution.
  std::istringstream in(*front);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(first.rfind("0," + csv::format_number(s["x_saa"].get<double>()) + ",", 0) == 0);

  InventoryConfig other;
  other.seed = 8;
  CHECK(*run_inventory(other).file("frontier_chi2.csv") != *front);
}

TEST_CASE("portfolio experiment on a small synthetic matrix", "[experiments]") {
  PortfolioConfig cfg;
  cfg.n = 200;
  cfg.d = 6;
  cfg.tv_points = 5;
  cfg.budgeted_points = 5;
  cfg.chi2_points = 4;
  cfg.simplex.restarts = 2;
  const auto out = run_portfolio(cfg);
  CHECK(out.summary["failed_points"] == 0);
  CHECK(out.summary["assets"] == 6);
  REQUIRE(out.file("frontier_tv.csv") != nullptr);
  CHECK(count_lines(*out.file("frontier_tv.csv")) == 6);
  CHECK(out.file("frontier_tv.csv")->rfind("eps,A1,A2,", 0) == 0);
  CHECK(out.file("loss_histogram.csv") != nullptr);

  cfg.returns_path = "/nonexistent/returns.csv";
  CHECK_THROWS_AS(run_portfolio(cfg), ParseError);
}
