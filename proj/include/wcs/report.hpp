#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcs/core_dist.hpp"
#include "wcs/csv.hpp"
#include "wcs/dro.hpp"
#include "wcs/uncertainty.hpp"

namespace wcs::report {

using json = nlohmann::ordered_json;

/// Bumped whenever a field is renamed or removed from any emitted document.
inline constexpr int schema_version = 1;

inline json sensitivity_json(const UncertaintySetSpec& spec, const Sensitivity& s) {
  json j;
  j["schema_version"] = schema_version;
  j["family"] = measure_label(spec);
  j["value"] = s.value;
  j["growth"] = growth_name(s.growth);
  if (s.degenerate) j["degenerate"] = true;
  return j;
}

inline json worst_case_json(const UncertaintySetSpec& spec, double eps, const WorstCaseResult& r) {
  json j;
  j["schema_version"] = schema_version;
  j["family"] = measure_label(spec);
  j["eps"] = eps;
  j["value"] = r.value;
  if (!r.weights.empty()) j["weights"] = r.weights;
  if (!r.tail_weights.empty()) j["tail_weights"] = r.tail_weights;
  if (r.beta) j["beta"] = *r.beta;
  if (r.dual) {
    json d = json::object();
    if (r.dual->delta) d["delta"] = *r.dual->delta;
    if (r.dual->c) d["c"] = *r.dual->c;
    if (r.dual->gamma) d["gamma"] = *r.dual->gamma;
    if (r.dual->lambda) d["lambda"] = *r.dual->lambda;
    j["dual"] = d;
  }
  j["approximate"] = r.approximate;
  j["saturated"] = r.saturated;
  if (r.degenerate) j["degenerate"] = true;
  return j;
}

/**
 * @brief One row per frontier point.
 *
 * Columns: eps, the decision (x, or x1..xd), the nominal objective, the robust
 * value, one <measure>_sensitivity column per measure, and an error column
 * that is empty unless the solve failed at that radius.
 */
inline std::string frontier_csv(const std::vector<FrontierPoint>& pts, const std::string& nominal_name,
                                const std::vector<std::string>& decision_names = {}) {
  std::ostringstream out;
  std::size_t dim = 0;
  std::vector<std::string> measures;
  for (const auto& p : pts) {
    dim = std::max(dim, p.decision.size());
    if (measures.empty())
      for (const auto& [k, v] : p.sensitivities) measures.push_back(k);
  }
  out << "eps";
  for (std::size_t j = 0; j < dim; ++j) {
    if (j < decision_names.size()) out << ',' << decision_names[j];
    else out << (dim == 1 ? std::string(",x") : ",x" + std::to_string(j + 1));
  }
  out << ',' << nominal_name << ",robust_value";
  for (const auto& m : measures) out << ',' << m << "_sensitivity";
  out << ",error\n";
  for (const auto& p : pts) {
    out << csv::format_number(p.eps);
    for (std::size_t j = 0; j < dim; ++j) out << ',' << (j < p.decision.size() ? csv::format_number(p.decision[j]) : "");
    if (p.error) {
      out << ",,";
      for (std::size_t k = 0; k < measures.size(); ++k) out << ',';
      std::string msg = *p.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << ',' << msg << '\n';
      continue;
    }
    out << ',' << csv::format_number(p.nominal) << ',' << csv::format_number(p.robust_value);
    for (const auto& m : measures) {
      const auto v = p.sensitivity(m);
      out << ',' << (v ? csv::format_number(*v) : "");
    }
    out << ",\n";
  }
  return out.str();
}

/// Probability mass per bin for several distributions over common edges.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::string> names;
  std::vector<std::vector<double>> mass;  // mass[series][bin]
};

inline Histogram histogram(const std::vector<std::pair<std::string, DiscreteDistribution>>& series,
                           std::size_t bins) {
  if (series.empty() || bins == 0) throw DomainError("histogram needs at least one series and one bin");
  double lo = min_value(series.front().second), hi = max_value(series.front().second);
  for (const auto& [name, d] : series) {
    lo = std::min(lo, min_value(d));
    hi = std::max(hi, max_value(d));
  }
  if (hi == lo) hi = lo + 1.0;
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k)
    h.edges[k] = k == bins ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
  for (const auto& [name, d] : series) {
    h.names.push_back(name);
    std::vector<double> m(bins, 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto k = static_cast<std::size_t>((d.value(i) - lo) / (hi - lo) * static_cast<double>(bins));
      m[std::min(k, bins - 1)] += d.prob(i);
    }
    h.mass.push_back(std::move(m));
  }
  return h;
}

inline std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  out << "bin_lo,bin_hi";
  for (const auto& n : h.names) out << ',' << n;
  out << '\n';
  for (std::size_t k = 0; k + 1 < h.edges.size(); ++k) {
    out << csv::format_number(h.edges[k]) << ',' << csv::format_number(h.edges[k + 1]);
    for (const auto& m : h.mass) out << ',' << csv::format_number(m[k]);
    out << '\n';
  }
  return out.str();
}

namespace detail {

inline const char* series_colour(std::size_t k) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return palette[k % 6];
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  static constexpr double width = 640, height = 400, left = 60, right = 20, top = 20, bottom = 40;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline std::string svg_open(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::width << "\" height=\"" << Frame::height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<line x1=\"" << Frame::left << "\" y1=\"" << fmt(f.py(f.y0)) << "\" x2=\""
    << fmt(Frame::width - Frame::right) << "\" y2=\"" << fmt(f.py(f.y0)) << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << Frame::left << "\" y1=\"" << Frame::top << "\" x2=\"" << Frame::left << "\" y2=\""
    << fmt(f.py(f.y0)) << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << fmt(Frame::width / 2) << "\" y=\"" << fmt(Frame::height - 8) << "\" text-anchor=\"middle\">"
    << xlabel << "</text>\n"
    << "<text x=\"14\" y=\"" << fmt(Frame::height / 2) << "\" transform=\"rotate(-90 14 " << fmt(Frame::height / 2)
    << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n"
    << "<text x=\"" << Frame::left << "\" y=\"" << fmt(f.py(f.y0) + 14) << "\" text-anchor=\"middle\">"
    << csv::format_number(f.x0) << "</text>\n"
    << "<text x=\"" << fmt(Frame::width - Frame::right) << "\" y=\"" << fmt(f.py(f.y0) + 14)
    << "\" text-anchor=\"middle\">" << csv::format_number(f.x1) << "</text>\n"
    << "<text x=\"" << fmt(Frame::left - 4) << "\" y=\"" << fmt(f.py(f.y1) + 4) << "\" text-anchor=\"end\">"
    << csv::format_number(f.y1) << "</text>\n";
  return o.str();
}

inline std::string legend(const std::vector<std::string>& names) {
  std::ostringstream o;
  for (std::size_t k = 0; k < names.size(); ++k)
    o << "<text x=\"" << fmt(Frame::width - Frame::right - 4) << "\" y=\"" << fmt(Frame::top + 14.0 * (k + 1))
      << "\" text-anchor=\"end\" fill=\"" << series_colour(k) << "\">" << names[k] << "</text>\n";
  return o.str();
}

}  // namespace detail

/// Step outlines of each series over the common bins.
inline std::string histogram_svg(const Histogram& h, const std::string& xlabel) {
  double top = 0.0;
  for (const auto& m : h.mass) top = std::max(top, *std::max_element(m.begin(), m.end()));
  const detail::Frame f{h.edges.front(), h.edges.back(), 0.0, top > 0.0 ? top : 1.0};
  std::ostringstream o;
  o << detail::svg_open(f, xlabel, "probability");
  for (std::size_t s = 0; s < h.mass.size(); ++s) {
    o << "<polyline fill=\"none\" stroke=\"" << detail::series_colour(s) << "\" points=\"";
    for (std::size_t k = 0; k + 1 < h.edges.size(); ++k)
      o << detail::fmt(f.px(h.edges[k])) << ',' << detail::fmt(f.py(h.mass[s][k])) << ' '
        << detail::fmt(f.px(h.edges[k + 1])) << ',' << detail::fmt(f.py(h.mass[s][k])) << ' ';
    o << "\"/>\n";
  }
  o << detail::legend(h.names) << "</svg>\n";
  return o.str();
}

/// Nominal objective against one sensitivity measure, one polyline per frontier.
inline std::string frontier_svg(const std::vector<std::pair<std::string, std::vector<FrontierPoint>>>& frontiers,
                                const std::string& measure, const std::string& nominal_name) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& [name, pts] : frontiers)
    for (const auto& p : pts) {
      const auto s = p.sensitivity(measure);
      if (p.error || !s) continue;
      x0 = std::min(x0, p.nominal);
      x1 = std::max(x1, p.nominal);
      y0 = std::min(y0, *s);
      y1 = std::max(y1, *s);
    }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const detail::Frame f{x0, x1, y0, y1};
  std::ostringstream o;
  o << detail::svg_open(f, nominal_name, measure + " sensitivity");
  std::vector<std::string> names;
  for (std::size_t s = 0; s < frontiers.size(); ++s) {
    names.push_back(frontiers[s].first);
    o << "<polyline fill=\"none\" stroke=\"" << detail::series_colour(s) << "\" points=\"";
    for (const auto& p : frontiers[s].second) {
      const auto v = p.sensitivity(measure);
      if (p.error || !v) continue;
      o << detail::fmt(f.px(p.nominal)) << ',' << detail::fmt(f.py(*v)) << ' ';
    }
    o << "\"/>\n";
  }
  o << detail::legend(names) << "</svg>\n";
  return o.str();
}

}  // namespace wcs::report
