#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "secnav/error.hpp"
#include "secnav/geometry.hpp"

namespace secnav {

struct TimedPoint {
  double t{0.0};
  Point2 p;
};

using Trajectory = std::vector<TimedPoint>;

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_{0.0};
  double comp_{0.0};
};

inline double arc_length(std::span<const TimedPoint> traj) {
  CompensatedSum len;
  for (std::size_t i = 1; i < traj.size(); ++i) len.add(distance(traj[i - 1].p, traj[i].p));
  return len.value();
}

/// Position at time t, linearly interpolated and clamped to the end points.
inline Point2 interpolate_at(std::span<const TimedPoint> traj, double t) {
  if (traj.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  if (t <= traj.front().t) return traj.front().p;
  if (t >= traj.back().t) return traj.back().p;
  const auto hi = std::upper_bound(traj.begin(), traj.end(), t,
                                   [](double value, const TimedPoint& s) { return value < s.t; });
  const auto lo = hi - 1;
  const double span_t = hi->t - lo->t;
  if (span_t <= 0.0) return hi->p;
  const double w = (t - lo->t) / span_t;
  return lo->p + (hi->p - lo->p) * w;
}

/// Timestamps a polyline by uniform traversal over [t0, t1] (time proportional
/// to arc length).
inline Trajectory retime_uniform(std::span<const Point2> polyline, double t0, double t1) {
  Trajectory out;
  out.reserve(polyline.size());
  double total = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) total += distance(polyline[i - 1], polyline[i]);
  double acc = 0.0;
  for (std::size_t i = 0; i < polyline.size(); ++i) {
    if (i > 0) acc += distance(polyline[i - 1], polyline[i]);
    const double frac = total > 0.0 ? acc / total : 0.0;
    out.push_back({t0 + (t1 - t0) * frac, polyline[i]});
  }
  return out;
}

/// |est length - true length| / true length * 100.
inline double percent_error(std::span<const TimedPoint> est, std::span<const TimedPoint> truth) {
  if (est.size() < 2 || truth.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "percent error needs at least 2 points per trajectory");
  }
  const double true_len = arc_length(truth);
  if (!(true_len > 0.0)) throw Error(ErrorCode::ZeroLengthTruth, "ground truth has zero length");
  return std::abs(arc_length(est) - true_len) / true_len * 100.0;
}

/// Mean L2 distance between each estimated point and the truth interpolated
/// at the same timestamp.
inline double ade(std::span<const TimedPoint> est, std::span<const TimedPoint> truth) {
  if (est.empty() || truth.empty()) throw Error(ErrorCode::InvalidArgument, "ADE needs non-empty trajectories");
  CompensatedSum sum;
  for (const TimedPoint& s : est) sum.add(distance(s.p, interpolate_at(truth, s.t)));
  return sum.value() / static_cast<double>(est.size());
}

inline double fde(std::span<const TimedPoint> est, std::span<const TimedPoint> truth) {
  if (est.empty() || truth.empty()) throw Error(ErrorCode::InvalidArgument, "FDE needs non-empty trajectories");
  return distance(est.back().p, truth.back().p);
}

struct TrajectoryEval {
  double percent_error{0.0};
  double ade{0.0};
  double fde{0.0};
  double est_length{0.0};
  double true_length{0.0};
};

/// Scores `est` against a truth polyline timed uniformly over the estimate's
/// own time span.
inline TrajectoryEval evaluate_trajectory(std::span<const TimedPoint> est, std::span<const Point2> truth_polyline) {
  if (est.empty()) throw Error(ErrorCode::InvalidArgument, "empty estimate");
  const Trajectory truth = retime_uniform(truth_polyline, est.front().t, est.back().t);
  TrajectoryEval ev;
  ev.percent_error = percent_error(est, truth);
  ev.ade = ade(est, truth);
  ev.fde = fde(est, truth);
  ev.est_length = arc_length(est);
  ev.true_length = arc_length(truth);
  return ev;
}

/// Relative improvement of b over a, in percent.
inline double improvement_percent(double a, double b) { return (a - b) / a * 100.0; }

/// One trial as reported in the per-trial CSV.
struct TrialRecord {
  std::size_t trial{0};
  int path_class{0};
  std::size_t path_id{0};
  int approach{0};
  TrajectoryEval eval;
  bool reached_goal{false};
  int safety_violations{0};
  std::size_t steps{0};
};

struct MetricMeans {
  double percent_error{0.0};
  double ade{0.0};
  double fde{0.0};
  std::size_t trials{0};
};

struct BatchSummary {
  /// means[approach][path_class]
  std::map<int, std::map<int, MetricMeans>> per_class;
  /// Mean of the class means per approach (the "Average" column).
  std::map<int, MetricMeans> overall;
  std::size_t trial_count{0};

  /// Percent-error gap (percentage points) between two approaches.
  double percent_error_gap(int a, int b) const { return overall.at(a).percent_error - overall.at(b).percent_error; }
  double ade_improvement(int a, int b) const { return improvement_percent(overall.at(a).ade, overall.at(b).ade); }
  double fde_improvement(int a, int b) const { return improvement_percent(overall.at(a).fde, overall.at(b).fde); }
};

/// Per-(approach, class) means with compensated sums; the result does not
/// depend on record order beyond floating-point rounding of the sums.
inline BatchSummary batch_evaluate(std::span<const TrialRecord> records) {
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "no trials to summarise");
  struct Acc {
    CompensatedSum pe, ade, fde;
    std::size_t n{0};
  };
  std::map<int, std::map<int, Acc>> acc;
  for (const TrialRecord& r : records) {
    Acc& a = acc[r.approach][r.path_class];
    a.pe.add(r.eval.percent_error);
    a.ade.add(r.eval.ade);
    a.fde.add(r.eval.fde);
    ++a.n;
  }
  BatchSummary s;
  s.trial_count = records.size();
  for (auto& [approach, classes] : acc) {
    CompensatedSum pe, ade_sum, fde_sum;
    std::size_t total = 0;
    for (auto& [cls, a] : classes) {
      const double n = static_cast<double>(a.n);
      MetricMeans m{a.pe.value() / n, a.ade.value() / n, a.fde.value() / n, a.n};
      s.per_class[approach][cls] = m;
      pe.add(m.percent_error);
      ade_sum.add(m.ade);
      fde_sum.add(m.fde);
      total += a.n;
    }
    const double k = static_cast<double>(classes.size());
    s.overall[approach] = {pe.value() / k, ade_sum.value() / k, fde_sum.value() / k, total};
  }
  return s;
}

}  // namespace secnav
