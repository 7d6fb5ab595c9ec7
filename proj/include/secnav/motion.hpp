#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "secnav/error.hpp"
#include "secnav/geometry.hpp"

namespace secnav {

/// Wraps an angle into [-pi, pi).
inline double normalize_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = theta - two_pi * std::floor((theta + std::numbers::pi) / two_pi);
  if (wrapped >= std::numbers::pi) wrapped -= two_pi;
  if (wrapped < -std::numbers::pi) wrapped += two_pi;
  return wrapped;
}

struct EntityState {
  Point2 position;
  double velocity{0.0};  // m/s, within [0, max_speed]
  double heading{0.0};   // rad, within [-pi, pi)

  friend bool operator==(const EntityState&, const EntityState&) = default;
};

struct ControlInput {
  double desired_speed{0.0};   // m/s
  double heading_change{0.0};  // rad requested over one step

  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct MotionParams {
  double accel_limit{1.5};      // m/s^2
  double decel_limit{1.5};      // m/s^2
  double maneuverability{0.6};  // rad/s
  double max_speed{10.0};       // m/s
  double dt{1.0};               // s
  double terrain_factor{1.0};   // scales accel/decel, (0, 1]

  void validate() const {
    if (!(accel_limit > 0 && decel_limit > 0 && maneuverability > 0 && max_speed > 0 && dt > 0)) {
      throw Error(ErrorCode::InvalidArgument, "motion limits and dt must be positive");
    }
    if (!(terrain_factor > 0 && terrain_factor <= 1)) {
      throw Error(ErrorCode::InvalidArgument, "terrain factor must lie in (0, 1]");
    }
  }

  double max_heading_step() const { return maneuverability * dt; }
};

/// Standard deviations of the per-step process noise terms.
struct ProcessNoise {
  double sigma_x{0.05};
  double sigma_y{0.05};
  double sigma_theta{0.01};
  double sigma_v{0.05};

  static ProcessNoise none() { return {0.0, 0.0, 0.0, 0.0}; }

  void validate() const {
    if (sigma_x < 0 || sigma_y < 0 || sigma_theta < 0 || sigma_v < 0) {
      throw Error(ErrorCode::InvalidArgument, "process noise deviations must be >= 0");
    }
  }
};

/// One realisation of the process noise terms for a single step.
struct ProcessDraws {
  double velocity{0.0};
  double heading{0.0};
  double x{0.0};
  double y{0.0};

  /// Draw order is fixed (v, theta, x, y) so a seeded generator reproduces a
  /// run exactly. Unit normals are always consumed, even for zero sigmas.
  template <class Rng>
  static ProcessDraws sample(const ProcessNoise& noise, Rng& rng) {
    std::normal_distribution<double> unit(0.0, 1.0);
    ProcessDraws d;
    d.velocity = noise.sigma_v * unit(rng);
    d.heading = noise.sigma_theta * unit(rng);
    d.x = noise.sigma_x * unit(rng);
    d.y = noise.sigma_y * unit(rng);
    return d;
  }
};

/// Which argument of the velocity min/max is selected. Only `Kinematic`
/// (v +/- limit * dt) depends on the current velocity.
enum class VelocityRegime { Kinematic, Setpoint, Saturated };

inline VelocityRegime velocity_regime(double v, const ControlInput& u, const MotionParams& p) {
  if (u.desired_speed > v) {
    const double reach = v + p.terrain_factor * p.accel_limit * p.dt;
    if (reach < u.desired_speed && reach < p.max_speed) return VelocityRegime::Kinematic;
    return u.desired_speed <= p.max_speed ? VelocityRegime::Setpoint : VelocityRegime::Saturated;
  }
  const double reach = v - p.terrain_factor * p.decel_limit * p.dt;
  if (reach > u.desired_speed && reach > 0.0) return VelocityRegime::Kinematic;
  return u.desired_speed >= 0.0 ? VelocityRegime::Setpoint : VelocityRegime::Saturated;
}

inline double update_velocity(double v, const ControlInput& u, const MotionParams& p,
                              double noise_draw = 0.0) {
  double next;
  if (u.desired_speed > v) {
    next = std::min({v + p.terrain_factor * p.accel_limit * p.dt, u.desired_speed, p.max_speed});
  } else {
    next = std::max({v - p.terrain_factor * p.decel_limit * p.dt, u.desired_speed, 0.0});
  }
  return std::clamp(next + noise_draw, 0.0, p.max_speed);
}

inline double clip_heading_change(double heading_change, const MotionParams& p) {
  const double limit = p.max_heading_step();
  return std::clamp(heading_change, -limit, limit);
}

inline double update_heading(double theta, const ControlInput& u, const MotionParams& p,
                             double noise_draw = 0.0) {
  return normalize_angle(theta + clip_heading_change(u.heading_change, p) + noise_draw);
}

/// One motion step: velocity, then heading, then position along the new
/// heading. With default (zero) draws this is the deterministic model.
inline EntityState step(const EntityState& s, const ControlInput& u, const MotionParams& p,
                        const ProcessDraws& draws = {}) {
  EntityState next;
  next.velocity = update_velocity(s.velocity, u, p, draws.velocity);
  next.heading = update_heading(s.heading, u, p, draws.heading);
  const double travel = next.velocity * p.dt;
  next.position = {s.position.x + travel * std::cos(next.heading) + draws.x,
                   s.position.y + travel * std::sin(next.heading) + draws.y};
  return next;
}

template <class Rng>
EntityState step(const EntityState& s, const ControlInput& u, const MotionParams& p,
                 const ProcessNoise& noise, Rng& rng) {
  return step(s, u, p, ProcessDraws::sample(noise, rng));
}

struct Guidance {
  ControlInput control;
  double time_to_target{0.0};  // s, at the commanded speed
};

/// Control that points the entity at `target`. The heading change is the
/// full bearing error; the motion model clips it per step.
inline Guidance compute_control(const EntityState& current, Point2 target, double desired_speed,
                                const MotionParams&) {
  if (!(desired_speed > 0.0)) {
    throw Error(ErrorCode::ZeroSpeed, "desired speed must be positive");
  }
  const Point2 delta = target - current.position;
  const double dist = norm(delta);
  if (dist == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "target coincides with current position");
  }
  Guidance g;
  g.control.desired_speed = desired_speed;
  g.control.heading_change = normalize_angle(std::atan2(delta.y, delta.x) - current.heading);
  g.time_to_target = dist / desired_speed;
  return g;
}

}  // namespace secnav
