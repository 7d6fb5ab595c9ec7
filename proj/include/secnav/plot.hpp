#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "secnav/error.hpp"
#include "secnav/experiment.hpp"
#include "secnav/metrics.hpp"
#include "secnav/scenario.hpp"

namespace secnav {

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Map frame (y up) to SVG pixels (y down).
struct MapFrame {
  double scale{3.0};
  double pad{30.0};
  double height{200.0};

  double x(double mx) const { return pad + mx * scale; }
  double y(double my) const { return pad + (height - my) * scale; }

  std::string points(std::span<const Point2> pts) const {
    std::string s;
    for (Point2 p : pts) s += num(x(p.x)) + "," + num(y(p.y)) + " ";
    return s;
  }
};

inline const char* kApproachColor[] = {"#888888", "#d62728", "#1f77b4"};

}  // namespace detail

/// Largest distance between an observed and the simulated true position at
/// the same step.
inline double max_deviation(const TracedRun& run) {
  double worst = 0.0;
  const std::size_t n = std::min(run.observed.size(), run.truth.size());
  for (std::size_t k = 0; k < n; ++k) {
    worst = std::max(worst, distance(run.observed[k].state.position, run.truth[k].state.position));
  }
  return worst;
}

/// Map with landmarks, hazards, corridor hulls, reference path, the simulated
/// true trajectory and the observed one.
inline void write_map_svg(std::ostream& os, const Scenario& sc, const PreparedPath& path, const TracedRun& run) {
  const detail::MapFrame f{3.0, 30.0, sc.map.height};
  const double w = 2 * f.pad + sc.map.width * f.scale;
  const double h = 2 * f.pad + sc.map.height * f.scale + 40;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(w) << "\" height=\"" << detail::num(h)
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"" << detail::num(f.pad) << "\" y=\"" << detail::num(f.pad) << "\" width=\""
     << detail::num(sc.map.width * f.scale) << "\" height=\"" << detail::num(sc.map.height * f.scale)
     << "\" fill=\"white\" stroke=\"black\"/>\n";

  for (const auto& poly : sc.map.obstacles) {
    os << "<polygon points=\"" << f.points(poly) << "\" fill=\"#bbbbbb\" stroke=\"none\"/>\n";
  }
  for (const ConvexHullPolygon& hull : path.corridor.hulls) {
    os << "<polygon points=\"" << f.points(hull.vertices())
       << "\" fill=\"#2ca02c\" fill-opacity=\"0.12\" stroke=\"#2ca02c\" stroke-width=\"0.8\"/>\n";
  }
  for (const Landmark& lm : sc.map.landmarks) {
    os << "<circle cx=\"" << detail::num(f.x(lm.position.x)) << "\" cy=\"" << detail::num(f.y(lm.position.y))
       << "\" r=\"2.5\" fill=\"black\"/>\n";
  }
  os << "<polyline points=\"" << f.points(path.truth.polyline)
     << "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1\" stroke-dasharray=\"4,3\"/>\n";

  auto positions = [](const std::vector<TimedState>& states) {
    std::vector<Point2> pts;
    for (const TimedState& s : states) pts.push_back(s.state.position);
    return pts;
  };
  os << "<polyline points=\"" << f.points(positions(run.truth))
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  os << "<polyline points=\"" << f.points(positions(run.observed)) << "\" fill=\"none\" stroke=\""
     << detail::kApproachColor[run.approach == 1 ? 1 : 2] << "\" stroke-width=\"1.5\"/>\n";

  const double text_y = f.pad + sc.map.height * f.scale + 20;
  os << "<text x=\"" << detail::num(f.pad) << "\" y=\"" << detail::num(text_y) << "\">path " << run.path_id
     << " (PC" << run.path_class << "), " << approach_label(run.approach) << ": black = true, colour = observed, "
     << "max deviation " << detail::num(max_deviation(run)) << " m</text>\n";
  os << "</svg>\n";
}

enum class BarMetric { PercentError, Ade, Fde };

inline const char* to_string(BarMetric m) {
  switch (m) {
    case BarMetric::PercentError: return "percent error (%)";
    case BarMetric::Ade: return "ADE (m)";
    case BarMetric::Fde: return "FDE (m)";
  }
  return "?";
}

/// One group per path class, one bar per approach.
inline void write_bar_chart_svg(std::ostream& os, const BatchSummary& s, BarMetric metric) {
  auto value = [&](const MetricMeans& m) {
    return metric == BarMetric::PercentError ? m.percent_error : metric == BarMetric::Ade ? m.ade : m.fde;
  };
  std::vector<int> classes;
  double vmax = 0.0;
  for (const auto& [approach, per] : s.per_class) {
    for (const auto& [cls, m] : per) {
      if (std::find(classes.begin(), classes.end(), cls) == classes.end()) classes.push_back(cls);
      vmax = std::max(vmax, value(m));
    }
  }
  std::sort(classes.begin(), classes.end());
  if (vmax <= 0.0) vmax = 1.0;

  const double bar_w = 28, gap = 30, left = 50, top = 30, plot_h = 220;
  const std::size_t n_app = s.per_class.size();
  const double group_w = static_cast<double>(n_app) * bar_w + gap;
  const double w = left + static_cast<double>(classes.size()) * group_w + 20;
  const double h = top + plot_h + 70;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(w) << "\" height=\"" << detail::num(h)
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"" << detail::num(left) << "\" y=\"18\">" << to_string(metric) << "</text>\n";
  os << "<line x1=\"" << detail::num(left) << "\" y1=\"" << detail::num(top + plot_h) << "\" x2=\"" << detail::num(w - 10)
     << "\" y2=\"" << detail::num(top + plot_h) << "\" stroke=\"black\"/>\n";

  for (std::size_t g = 0; g < classes.size(); ++g) {
    const double gx = left + gap / 2 + static_cast<double>(g) * group_w;
    std::size_t a = 0;
    for (const auto& [approach, per] : s.per_class) {
      const auto it = per.find(classes[g]);
      if (it != per.end()) {
        const double v = value(it->second);
        const double bh = v / vmax * plot_h;
        const double x = gx + static_cast<double>(a) * bar_w;
        os << "<rect class=\"bar\" x=\"" << detail::num(x) << "\" y=\"" << detail::num(top + plot_h - bh)
           << "\" width=\"" << detail::num(bar_w - 4) << "\" height=\"" << detail::num(bh) << "\" fill=\""
           << detail::kApproachColor[approach == 1 ? 1 : 2] << "\"/>\n";
        os << "<text x=\"" << detail::num(x) << "\" y=\"" << detail::num(top + plot_h - bh - 3)
           << "\" font-size=\"9\">" << detail::num(v) << "</text>\n";
      }
      ++a;
    }
    os << "<text x=\"" << detail::num(gx) << "\" y=\"" << detail::num(top + plot_h + 16) << "\">PC" << classes[g]
       << "</text>\n";
  }
  double ly = top + plot_h + 36;
  for (const auto& [approach, per] : s.per_class) {
    os << "<rect x=\"" << detail::num(left) << "\" y=\"" << detail::num(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
       << detail::kApproachColor[approach == 1 ? 1 : 2] << "\"/>";
    os << "<text x=\"" << detail::num(left + 14) << "\" y=\"" << detail::num(ly) << "\">" << approach_label(approach)
       << "</text>\n";
    ly += 14;
  }
  os << "</svg>\n";
}

/// Writes map_path<id>_a<approach>.svg for every traced run and one bar chart
/// per metric. Empty results produce a warning and no files.
inline std::vector<std::filesystem::path> plot_results(const std::filesystem::path& out_dir, const Scenario& sc,
                                                       std::span<const TrialRecord> records,
                                                       std::span<const TracedRun> traces,
                                                       std::ostream& warn = std::cerr) {
  std::vector<std::filesystem::path> written;
  if (records.empty()) {
    warn << "warning: no trial results to plot\n";
    return written;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + p.string() + " for writing");
    written.push_back(p);
    return f;
  };

  for (const TracedRun& run : traces) {
    if (run.path_id >= sc.paths.size()) {
      throw Error(ErrorCode::InvalidArgument, "trace refers to path " + std::to_string(run.path_id) +
                                                  " not in the scenario");
    }
    const PreparedPath path = prepare_path(sc, sc.paths[run.path_id]);
    auto f = open(out_dir / ("map_path" + std::to_string(run.path_id) + "_a" + std::to_string(run.approach) + ".svg"));
    write_map_svg(f, sc, path, run);
  }

  const BatchSummary summary = batch_evaluate(records);
  const std::pair<BarMetric, const char*> charts[] = {
      {BarMetric::PercentError, "bars_percent_error.svg"}, {BarMetric::Ade, "bars_ade.svg"}, {BarMetric::Fde, "bars_fde.svg"}};
  for (const auto& [metric, name] : charts) {
    auto f = open(out_dir / name);
    write_bar_chart_svg(f, summary, metric);
  }
  return written;
}

}  // namespace secnav
