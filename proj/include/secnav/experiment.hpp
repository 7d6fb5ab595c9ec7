#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "secnav/error.hpp"
#include "secnav/metrics.hpp"
#include "secnav/navigator.hpp"
#include "secnav/scenario.hpp"

namespace secnav {

struct ExperimentConfig {
  std::vector<Approach> approaches{Approach::BmmLanBLoc, Approach::BmmEkfLanBLoc};
  std::size_t trials{1000};  // per path and approach
  std::uint64_t base_seed{1};
  MotionParams motion;
  NavigatorConfig nav;
  // Overrides applied on top of the scenario file.
  std::optional<double> margin;
  std::optional<double> sigma_range;
  unsigned jobs{1};
  /// Trial whose full trajectories are kept for plotting.
  std::size_t traced_trial{0};

  void validate() const {
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    if (approaches.empty()) throw Error(ErrorCode::InvalidArgument, "no approach selected");
    if (jobs < 1) throw Error(ErrorCode::InvalidArgument, "jobs must be >= 1");
    if (margin && !(*margin > 0)) throw Error(ErrorCode::InvalidArgument, "margin must be positive");
    if (sigma_range && !(*sigma_range >= 0)) throw Error(ErrorCode::InvalidArgument, "sigma-range must be >= 0");
    motion.validate();
  }
};

/// Observed and simulated-true positions of one traced run.
struct TracedRun {
  std::size_t path_id{0};
  int path_class{0};
  int approach{0};
  std::vector<TimedState> observed;
  std::vector<TimedState> truth;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  // ordered by (path, trial, approach)
  std::vector<TracedRun> traces;     // ordered by (path, approach)
};

/// Applies the config overrides to a scenario.
inline Scenario apply_overrides(Scenario sc, const ExperimentConfig& cfg) {
  if (cfg.margin) {
    for (PathSpec& p : sc.paths) p.margin = *cfg.margin;
  }
  if (cfg.sigma_range) sc.noise.measurement.sigma_range = *cfg.sigma_range;
  sc.validate();
  return sc;
}

/// Runs every (path, trial, approach) combination. Trial i of every path uses
/// seed base_seed + i; the output order is fixed, so results do not depend on
/// the number of worker threads.
inline ExperimentResult run_experiment(const Scenario& scenario_in, const ExperimentConfig& cfg) {
  cfg.validate();
  const Scenario scenario = apply_overrides(scenario_in, cfg);
  if (scenario.paths.empty()) throw Error(ErrorCode::InvalidArgument, "scenario has no paths");

  std::vector<PreparedPath> paths;
  std::vector<NavigationSettings> settings;
  for (std::size_t i = 0; i < scenario.paths.size(); ++i) {
    paths.push_back(prepare_path(scenario, scenario.paths[i]));
    NavigationSettings s;
    s.motion = cfg.motion;
    s.noise = scenario.noise;
    s.nav = cfg.nav;
    s.filter = calibrated_filter(scenario.map, paths.back().truth, scenario.noise, cfg.nav.desired_speed, i + 1);
    settings.push_back(s);
  }

  const std::size_t n_app = cfg.approaches.size();
  const std::size_t total = paths.size() * cfg.trials * n_app;
  ExperimentResult result;
  result.records.resize(total);
  const bool tracing = cfg.traced_trial < cfg.trials;
  if (tracing) result.traces.resize(paths.size() * n_app);

  auto run_one = [&](std::size_t idx) {
    const std::size_t a = idx % n_app;
    const std::size_t trial = (idx / n_app) % cfg.trials;
    const std::size_t p = idx / (n_app * cfg.trials);
    const Approach approach = cfg.approaches[a];
    const NavigationOutcome out =
        navigate(paths[p], scenario.map, approach, settings[p], cfg.base_seed + trial);

    Trajectory est;
    est.reserve(out.trajectory.size());
    for (const TimedState& s : out.trajectory) est.push_back({s.t, s.state.position});

    TrialRecord& r = result.records[idx];
    r.trial = trial;
    r.path_class = paths[p].spec.path_class;
    r.path_id = p;
    r.approach = static_cast<int>(approach);
    r.eval = evaluate_trajectory(est, paths[p].truth.polyline);
    r.reached_goal = out.reached_goal;
    r.safety_violations = out.safety_violations;
    r.steps = out.steps();

    if (tracing && trial == cfg.traced_trial) {
      result.traces[p * n_app + a] = {p, r.path_class, r.approach, out.trajectory, out.truth};
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cfg.jobs, total));
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
    return result;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < total; i = next++) {
        try {
          run_one(i);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = total;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return result;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kTrialCsvHeader =
    "trial,path_class,path_id,approach,percent_error,ade,fde,reached_goal,safety_violations,steps";

inline void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << kTrialCsvHeader << '\n';
  for (const TrialRecord& r : records) {
    os << r.trial << ',' << r.path_class << ',' << r.path_id << ',' << r.approach << ','
       << detail::fmt_double(r.eval.percent_error) << ',' << detail::fmt_double(r.eval.ade) << ','
       << detail::fmt_double(r.eval.fde) << ',' << (r.reached_goal ? 1 : 0) << ',' << r.safety_violations << ','
       << r.steps << '\n';
  }
}

/// Parses rows written by write_trials_csv.
inline std::vector<TrialRecord> read_trials_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTrialCsvHeader) {
    throw Error(ErrorCode::ParseError, "trials CSV: line 1: unexpected header");
  }
  std::vector<TrialRecord> out;
  for (std::size_t lineno = 2; std::getline(is, line); ++lineno) {
    if (line.empty()) continue;
    TrialRecord r;
    int reached = 0;
    unsigned long long trial = 0, path_id = 0, steps = 0;
    if (std::sscanf(line.c_str(), "%llu,%d,%llu,%d,%lf,%lf,%lf,%d,%d,%llu", &trial, &r.path_class, &path_id,
                    &r.approach, &r.eval.percent_error, &r.eval.ade, &r.eval.fde, &reached, &r.safety_violations,
                    &steps) != 10) {
      throw Error(ErrorCode::ParseError, "trials CSV: line " + std::to_string(lineno) + ": malformed row");
    }
    r.trial = trial;
    r.path_id = path_id;
    r.steps = steps;
    r.reached_goal = reached != 0;
    out.push_back(r);
  }
  return out;
}

inline constexpr const char* kTraceCsvHeader = "path_id,path_class,approach,kind,step,t,x,y";

inline void write_traces_csv(std::ostream& os, const std::vector<TracedRun>& traces) {
  os << kTraceCsvHeader << '\n';
  for (const TracedRun& tr : traces) {
    for (const auto* kind : {"observed", "truth"}) {
      const auto& pts = std::string(kind) == "observed" ? tr.observed : tr.truth;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        os << tr.path_id << ',' << tr.path_class << ',' << tr.approach << ',' << kind << ',' << k << ','
           << detail::fmt_double(pts[k].t) << ',' << detail::fmt_double(pts[k].state.position.x) << ','
           << detail::fmt_double(pts[k].state.position.y) << '\n';
      }
    }
  }
}

inline std::vector<TracedRun> read_traces_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTraceCsvHeader) {
    throw Error(ErrorCode::ParseError, "trajectories CSV: line 1: unexpected header");
  }
  std::vector<TracedRun> out;
  for (std::size_t lineno = 2; std::getline(is, line); ++lineno) {
    if (line.empty()) continue;
    unsigned long long path_id = 0, step = 0;
    int path_class = 0, approach = 0;
    char kind[16] = {};
    double t = 0, x = 0, y = 0;
    if (std::sscanf(line.c_str(), "%llu,%d,%d,%15[a-z],%llu,%lf,%lf,%lf", &path_id, &path_class, &approach, kind,
                    &step, &t, &x, &y) != 8) {
      throw Error(ErrorCode::ParseError, "trajectories CSV: line " + std::to_string(lineno) + ": malformed row");
    }
    if (out.empty() || out.back().path_id != path_id || out.back().approach != approach) {
      out.push_back({static_cast<std::size_t>(path_id), path_class, approach, {}, {}});
    }
    const TimedState s{t, {{x, y}, 0.0, 0.0}};
    (std::string(kind) == "truth" ? out.back().truth : out.back().observed).push_back(s);
  }
  return out;
}

inline std::string approach_label(int approach) {
  return approach == 1 ? "Approach 1 (BMM+LanBLoc)" : "Approach 2 (BMM+EKF+LanBLoc)";
}

/// Two text tables: mean percent error per path class, then mean ADE/FDE per
/// path class, each with an Average column, followed by the improvements.
inline void write_summary(std::ostream& os, const BatchSummary& s) {
  std::vector<int> classes;
  for (const auto& [approach, per] : s.per_class) {
    for (const auto& [cls, m] : per) {
      if (std::find(classes.begin(), classes.end(), cls) == classes.end()) classes.push_back(cls);
    }
  }
  std::sort(classes.begin(), classes.end());

  auto cell = [](std::string text, std::size_t width) {
    if (text.size() < width) text.insert(0, width - text.size(), ' ');
    return text;
  };
  const std::size_t label_w = 30;
  auto label = [&](const std::string& text) { return text + std::string(label_w - std::min(label_w, text.size()), ' '); };

  os << "Average percent error (%)\n";
  os << label("Approach");
  for (int c : classes) os << cell("PC" + std::to_string(c), 12);
  os << cell("Average", 12) << '\n';
  for (const auto& [approach, per] : s.per_class) {
    os << label(approach_label(approach));
    for (int c : classes) os << cell(per.count(c) ? detail::fmt_fixed(per.at(c).percent_error) : "-", 12);
    os << cell(detail::fmt_fixed(s.overall.at(approach).percent_error), 12) << '\n';
  }

  os << "\nADE / FDE (m)\n";
  os << label("Approach");
  for (int c : classes) os << cell("PC" + std::to_string(c), 14);
  os << cell("Average", 14) << '\n';
  for (const auto& [approach, per] : s.per_class) {
    os << label(approach_label(approach));
    for (int c : classes) {
      os << cell(per.count(c) ? detail::fmt_fixed(per.at(c).ade) + " / " + detail::fmt_fixed(per.at(c).fde) : "-",
                 14);
    }
    const MetricMeans& o = s.overall.at(approach);
    os << cell(detail::fmt_fixed(o.ade) + " / " + detail::fmt_fixed(o.fde), 14) << '\n';
  }

  if (s.overall.count(1) && s.overall.count(2)) {
    os << "\nApproach 2 vs Approach 1: percent error " << detail::fmt_fixed(s.percent_error_gap(1, 2))
       << " points lower, ADE " << detail::fmt_fixed(s.ade_improvement(1, 2)) << "% lower, FDE "
       << detail::fmt_fixed(s.fde_improvement(1, 2)) << "% lower\n";
  }
  os << "Trials: " << s.trial_count << '\n';
}

}  // namespace secnav
