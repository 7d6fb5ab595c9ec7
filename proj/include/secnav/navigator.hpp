#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "secnav/corridor.hpp"
#include "secnav/ekf.hpp"
#include "secnav/error.hpp"
#include "secnav/localization.hpp"
#include "secnav/motion.hpp"
#include "secnav/scenario.hpp"

namespace secnav {

enum class Approach {
  BmmLanBLoc = 1,     // motion-model prediction, raw localization fixes
  BmmEkfLanBLoc = 2,  // motion model inside an EKF fed by localization fixes
};

inline std::string_view to_string(Approach a) {
  return a == Approach::BmmLanBLoc ? "BMM+LanBLoc" : "BMM+EKF+LanBLoc";
}

enum class SafetyDecision { MoveAhead, AdvanceSegment, Reroute };

inline std::string_view to_string(SafetyDecision d) {
  switch (d) {
    case SafetyDecision::MoveAhead: return "MoveAhead";
    case SafetyDecision::AdvanceSegment: return "AdvanceSegment";
    case SafetyDecision::Reroute: return "Reroute";
  }
  return "?";
}

/// Checks a predicted position against the current hull, then the next one.
inline SafetyDecision safety_check(Point2 predicted, const SafeCorridor& corridor, std::size_t current_index) {
  if (current_index >= corridor.size()) {
    throw Error(ErrorCode::InvalidArgument, "segment index out of range");
  }
  if (point_in_convex_hull(predicted, corridor.hulls[current_index])) return SafetyDecision::MoveAhead;
  if (current_index + 1 < corridor.size() && point_in_convex_hull(predicted, corridor.hulls[current_index + 1])) {
    return SafetyDecision::AdvanceSegment;
  }
  return SafetyDecision::Reroute;
}

struct NavigatorConfig {
  double desired_speed{5.0};        // m/s
  double goal_threshold{2.0};       // m around the final centroid
  double reroute_speed_factor{0.5};
  double step_cap_factor{10.0};     // cap = factor * expected steps
};

struct NavigationSettings {
  MotionParams motion;
  NoiseConfig noise;
  NavigatorConfig nav;
  FilterConfig filter{FilterConfig::defaults()};
  StateCovariance initial_covariance{default_initial_covariance()};
};

struct TimedState {
  double t{0.0};
  EntityState state;
};

struct NavigationOutcome {
  /// Predicted positions the navigator committed to, one per step after the
  /// start sample. This is the trajectory scored against ground truth.
  std::vector<TimedState> trajectory;
  /// Post-measurement belief (raw fix or filtered) at each step.
  std::vector<TimedState> estimates;
  /// Simulated true states.
  std::vector<TimedState> truth;
  std::vector<ControlInput> control_log;  // applied (clipped) controls
  std::vector<SafetyDecision> decisions;
  std::vector<std::size_t> segment_log;   // segment index the decision was made in
  bool reached_goal{false};
  bool step_cap_exceeded{false};
  int safety_violations{0};  // true positions outside every hull
  int reroutes{0};
  int missed_fixes{0};

  std::size_t steps() const { return control_log.size(); }
};

namespace detail {

inline ControlInput clipped(ControlInput u, const MotionParams& p) {
  u.heading_change = clip_heading_change(u.heading_change, p);
  return u;
}

/// Distance covered when braking from `v` at the full deceleration limit,
/// counting the step driven at `v` itself.
inline double stopping_distance(double v, const MotionParams& p) {
  const double dv = p.decel_limit * p.terrain_factor * p.dt;
  double d = 0.0;
  for (; v > 0.0; v -= dv) d += v * p.dt;
  return d;
}

/// Largest speed in [floor, cap] whose stopping distance fits in `d`.
inline double braking_speed(double d, double floor, double cap, const MotionParams& p) {
  double lo = 0.0;
  double hi = cap;
  if (stopping_distance(hi, p) <= d) return cap;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (stopping_distance(mid, p) <= d ? lo : hi) = mid;
  }
  return std::clamp(lo, floor, cap);
}

}  // namespace detail

/// Builds the EKF configuration for a path: Q from the process noise, R from
/// the empirical fix error along the truth polyline. Variances are floored
/// so the innovation covariance stays invertible in noiseless runs.
inline FilterConfig calibrated_filter(const BattlefieldMap& map, const GroundTruthTrajectory& truth,
                                      const NoiseConfig& noise, double speed, std::uint64_t seed,
                                      std::size_t samples = 400) {
  std::vector<Point2> probes;
  probes.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    probes.push_back(truth.polyline[i * (truth.polyline.size() - 1) / std::max<std::size_t>(1, samples - 1)]);
  }
  std::mt19937_64 rng(seed);
  const FixErrorStats st = measure_fix_error(probes, map.landmarks, noise.detect_range, noise.measurement, speed, rng);
  constexpr double kFloor = 1e-3;
  return FilterConfig::from_noise(noise.process, std::max(st.rmse_x, kFloor), std::max(st.rmse_y, kFloor),
                                  std::max(noise.measurement.sigma_speed, kFloor));
}

/// Runs one navigation along a prepared path.
///
/// Each step: aim at the next unreached segment centroid (the goal after the
/// last one), predict one step ahead, and check the prediction against the
/// corridor. A prediction outside both the current and next hull is replaced
/// by a slower approach to the next segment's centroid. The entity then
/// moves under process noise and takes a localization fix.
///
/// Approach 1 keeps the latest fix as its state, with heading taken from the
/// last two fixes. Approach 2 runs the EKF predict/update cycle.
inline NavigationOutcome navigate(const PreparedPath& path, const BattlefieldMap& map, Approach approach,
                                  const NavigationSettings& settings, std::uint64_t seed) {
  const MotionParams& mp = settings.motion;
  const NavigatorConfig& nav = settings.nav;
  mp.validate();
  settings.noise.process.validate();
  settings.noise.measurement.validate();
  if (!(nav.desired_speed > 0)) throw Error(ErrorCode::ZeroSpeed, "desired speed must be positive");
  const SafeCorridor& corridor = path.corridor;
  if (corridor.size() < 2) throw Error(ErrorCode::InvalidArgument, "corridor needs at least 2 segments");

  const Point2 start = path.truth.polyline.front();
  const Point2 goal = path.truth.polyline.back();
  if (!point_in_convex_hull(start, corridor.hulls.front())) {
    throw Error(ErrorCode::InvalidArgument, "start position is outside the first hull");
  }

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(approach)};
  std::mt19937_64 rng(seq);

  const Point2 first_leg = path.truth.polyline[1] - start;
  EntityState true_state{start, std::min(nav.desired_speed, mp.max_speed), std::atan2(first_leg.y, first_leg.x)};

  // Approach 1 bookkeeping.
  EntityState fix_state = true_state;
  Point2 previous_fix = start;
  // Approach 2 bookkeeping.
  BeliefState belief{to_state_vector(true_state), settings.initial_covariance};

  auto believed = [&]() { return approach == Approach::BmmLanBLoc ? fix_state : belief.state(); };

  NavigationOutcome out;
  double t = 0.0;
  out.trajectory.push_back({t, true_state});
  out.estimates.push_back({t, true_state});
  out.truth.push_back({t, true_state});

  const double expected_steps = std::ceil(path.truth.length / (nav.desired_speed * mp.dt));
  const auto step_cap = static_cast<std::size_t>(std::max(1.0, nav.step_cap_factor * expected_steps));
  std::size_t index = 0;

  // Guidance waypoints: every segment centroid, then the goal.
  std::vector<Point2> waypoints(corridor.centroids.begin(), corridor.centroids.end());
  waypoints.push_back(goal);
  std::size_t waypoint = 0;
  const double switch_radius = 0.5 * nav.desired_speed * mp.dt;

  for (std::size_t k = 0;; ++k) {
    const EntityState current = believed();
    const double to_goal = distance(current.position, goal);
    if (to_goal <= nav.goal_threshold) {
      out.reached_goal = true;
      break;
    }
    if (k >= step_cap) {
      out.step_cap_exceeded = true;
      break;
    }

    // A waypoint is done once it is within half a step, or once the entity
    // is already past it along the following leg.
    while (waypoint + 1 < waypoints.size()) {
      const Point2 wp = waypoints[waypoint];
      const Point2 leg = waypoints[waypoint + 1] - wp;
      if (distance(current.position, wp) > switch_radius && dot(current.position - wp, leg) <= 0.0) break;
      ++waypoint;
    }
    const Point2 target = waypoints[waypoint];
    const bool final_leg = waypoint + 1 == waypoints.size();
    // On the final leg, split the remaining distance evenly over the steps it
    // needs so the last one lands on the goal. When the deceleration limit
    // rules that out, brake early enough not to step across the goal.
    double speed = nav.desired_speed;
    if (final_leg) {
      const double steps_left = std::ceil(to_goal / (nav.desired_speed * mp.dt) - 1e-9);
      const double uniform = to_goal / (std::max(1.0, steps_left) * mp.dt);
      const double slowest = current.velocity - mp.decel_limit * mp.terrain_factor * mp.dt;
      speed = uniform >= slowest
                  ? uniform
                  : detail::braking_speed(to_goal, 0.25 * nav.goal_threshold / mp.dt, nav.desired_speed, mp);
    }
    ControlInput u = detail::clipped(compute_control(current, target, speed, mp).control, mp);
    const bool last = index + 1 >= corridor.size();

    auto predict_with = [&](const ControlInput& c) {
      return approach == Approach::BmmLanBLoc ? BeliefState{to_state_vector(step(current, c, mp)), {}}
                                              : predict(belief, c, mp, settings.filter);
    };
    BeliefState predicted = predict_with(u);

    const SafetyDecision decision = safety_check(predicted.position(), corridor, index);
    out.decisions.push_back(decision);
    out.segment_log.push_back(index);
    if (decision == SafetyDecision::AdvanceSegment) {
      ++index;
    } else if (decision == SafetyDecision::Reroute) {
      ++out.reroutes;
      const Point2 recovery = last ? corridor.centroids[index] : corridor.centroids[index + 1];
      if (distance(current.position, recovery) > 0.0) {
        u = detail::clipped(
            compute_control(current, recovery, nav.reroute_speed_factor * nav.desired_speed, mp).control, mp);
        predicted = predict_with(u);
      }
    }
    out.control_log.push_back(u);

    true_state = step(true_state, u, mp, settings.noise.process, rng);
    t += mp.dt;

    std::optional<LocalizationFix> fix;
    try {
      fix = lanbloc_measure(true_state, map.landmarks, settings.noise.detect_range, settings.noise.measurement, rng);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientAnchors && e.code() != ErrorCode::DegenerateGeometry) throw;
      ++out.missed_fixes;
    }

    if (approach == Approach::BmmLanBLoc) {
      const EntityState pred_state = predicted.state();
      if (fix) {
        const Point2 moved = fix->position - previous_fix;
        const double heading = norm(moved) > 1e-9 ? std::atan2(moved.y, moved.x) : pred_state.heading;
        fix_state = {fix->position, std::clamp(fix->speed, 0.0, mp.max_speed), normalize_angle(heading)};
        previous_fix = fix->position;
      } else {
        fix_state = pred_state;
      }
    } else {
      belief = predicted;
      if (fix) {
        belief = update(belief, MeasurementVector(fix->position.x, fix->position.y, fix->speed), settings.filter);
      }
    }

    if (!corridor.contains(true_state.position)) ++out.safety_violations;
    out.trajectory.push_back({t, predicted.state()});
    out.estimates.push_back({t, believed()});
    out.truth.push_back({t, true_state});
  }
  return out;
}

}  // namespace secnav
