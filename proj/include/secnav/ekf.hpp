#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "secnav/error.hpp"
#include "secnav/motion.hpp"

namespace secnav {

// State layout: (x, y, v, theta).
using StateVector = Eigen::Vector4d;
using StateCovariance = Eigen::Matrix4d;
// Measurement layout: (x, y, v).
using MeasurementVector = Eigen::Vector3d;
using MeasurementCovariance = Eigen::Matrix3d;
using ObservationMatrix = Eigen::Matrix<double, 3, 4>;

inline constexpr double kMaxInnovationCondition = 1e12;

inline StateVector to_state_vector(const EntityState& s) {
  return {s.position.x, s.position.y, s.velocity, s.heading};
}

inline EntityState to_entity_state(const StateVector& x) {
  return {{x(0), x(1)}, x(2), normalize_angle(x(3))};
}

struct BeliefState {
  StateVector mean{StateVector::Zero()};
  StateCovariance covariance{StateCovariance::Zero()};

  EntityState state() const { return to_entity_state(mean); }
  Point2 position() const { return {mean(0), mean(1)}; }
};

inline StateCovariance default_initial_covariance() {
  return Eigen::Vector4d(1.0, 1.0, 0.25, 0.05).asDiagonal();
}

struct FilterConfig {
  StateCovariance Q{StateCovariance::Zero()};
  MeasurementCovariance R{MeasurementCovariance::Identity()};
  ObservationMatrix H{ObservationMatrix::Identity()};

  /// Q from the process-noise deviations, R from per-axis measurement
  /// deviations, H selecting (x, y, v).
  static FilterConfig from_noise(const ProcessNoise& process, double sigma_pos_x, double sigma_pos_y,
                                 double sigma_speed) {
    FilterConfig cfg;
    cfg.Q = Eigen::Vector4d(process.sigma_x * process.sigma_x, process.sigma_y * process.sigma_y,
                            process.sigma_v * process.sigma_v,
                            process.sigma_theta * process.sigma_theta)
                .asDiagonal();
    cfg.R = Eigen::Vector3d(sigma_pos_x * sigma_pos_x, sigma_pos_y * sigma_pos_y,
                            sigma_speed * sigma_speed)
                .asDiagonal();
    cfg.H = ObservationMatrix::Identity();
    return cfg;
  }

  static FilterConfig defaults() { return from_noise(ProcessNoise{}, 0.03, 0.03, 0.05); }
};

/// Noiseless transition f(x, u).
inline StateVector transition(const StateVector& x, const ControlInput& u, const MotionParams& p) {
  return to_state_vector(step(to_entity_state(x), u, p));
}

/// Jacobian of the transition with respect to the state. Where the velocity
/// min/max selects the setpoint or a limit, dv'/dv is taken as 0.
inline StateCovariance jacobian_f(const StateVector& x, const ControlInput& u, const MotionParams& p) {
  const double v = x(2);
  const double v_next = update_velocity(v, u, p);
  const double theta_next = update_heading(x(3), u, p);
  const double g_v = velocity_regime(v, u, p) == VelocityRegime::Kinematic ? 1.0 : 0.0;
  const double c = std::cos(theta_next);
  const double s = std::sin(theta_next);

  StateCovariance F = StateCovariance::Identity();
  F(0, 2) = g_v * p.dt * c;
  F(0, 3) = -v_next * p.dt * s;
  F(1, 2) = g_v * p.dt * s;
  F(1, 3) = v_next * p.dt * c;
  F(2, 2) = g_v;
  return F;
}

inline StateCovariance symmetrized(const StateCovariance& P) { return 0.5 * (P + P.transpose()); }

inline BeliefState predict(const BeliefState& belief, const ControlInput& u, const MotionParams& p,
                           const FilterConfig& cfg) {
  const StateCovariance F = jacobian_f(belief.mean, u, p);
  BeliefState out;
  out.mean = transition(belief.mean, u, p);
  out.covariance = symmetrized(F * belief.covariance * F.transpose() + cfg.Q);
  return out;
}

inline double condition_number(const MeasurementCovariance& S) {
  Eigen::SelfAdjointEigenSolver<MeasurementCovariance> eig(S, Eigen::EigenvaluesOnly);
  const auto ev = eig.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  return lo > 0.0 ? ev.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

/// Kalman gain for the given belief; exposed for the Joseph-form checks.
inline Eigen::Matrix<double, 4, 3> kalman_gain(const BeliefState& belief, const FilterConfig& cfg) {
  const MeasurementCovariance S =
      cfg.H * belief.covariance * cfg.H.transpose() + cfg.R;
  if (!S.allFinite() || condition_number(S) > kMaxInnovationCondition) {
    throw Error(ErrorCode::SingularInnovation, "innovation covariance is not invertible");
  }
  // K = P H^T S^-1, via a solve on the symmetric S.
  return S.ldlt().solve(cfg.H * belief.covariance).transpose();
}

inline BeliefState update(const BeliefState& belief, const MeasurementVector& z, const FilterConfig& cfg) {
  const Eigen::Matrix<double, 4, 3> K = kalman_gain(belief, cfg);
  const MeasurementVector innovation = z - cfg.H * belief.mean;
  BeliefState out;
  out.mean = belief.mean + K * innovation;
  out.mean(3) = normalize_angle(out.mean(3));
  out.covariance = symmetrized((StateCovariance::Identity() - K * cfg.H) * belief.covariance);
  return out;
}

/// Alternating predict/update. Step k applies controls[k] and then, when
/// present, measurements[k]. Returns one belief per step.
inline std::vector<BeliefState> run_filter(const BeliefState& initial, std::span<const ControlInput> controls,
                                           std::span<const std::optional<MeasurementVector>> measurements,
                                           const MotionParams& p, const FilterConfig& cfg) {
  if (controls.size() != measurements.size()) {
    throw Error(ErrorCode::InvalidArgument, "controls and measurements must align per step");
  }
  std::vector<BeliefState> out;
  out.reserve(controls.size());
  BeliefState belief = initial;
  for (std::size_t k = 0; k < controls.size(); ++k) {
    belief = predict(belief, controls[k], p, cfg);
    if (measurements[k]) belief = update(belief, *measurements[k], cfg);
    out.push_back(belief);
  }
  return out;
}

}  // namespace secnav
