#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "secnav/error.hpp"
#include "secnav/geometry.hpp"
#include "secnav/motion.hpp"

namespace secnav {

/// Reject anchor triples whose triangle is thinner than this (m^2).
inline constexpr double kMinAnchorTriangleArea = 1.0;
inline constexpr double kDefaultDetectRange = 50.0;

struct Landmark {
  int id{0};
  Point2 position;
  int cluster_id{0};

  friend bool operator==(const Landmark&, const Landmark&) = default;
};

struct RangeMeasurement {
  int landmark_id{0};
  double distance{0.0};
};

/// Sensor noise of the simulated landmark ranging pipeline.
struct MeasurementNoise {
  double sigma_range{0.03};  // m, per-anchor Gaussian
  double sigma_speed{0.05};  // m/s

  static MeasurementNoise none() { return {0.0, 0.0}; }

  void validate() const {
    if (sigma_range < 0 || sigma_speed < 0) {
      throw Error(ErrorCode::InvalidArgument, "measurement noise deviations must be >= 0");
    }
  }
};

inline double triangle_area(Point2 a, Point2 b, Point2 c) { return 0.5 * std::abs(orient2d(a, b, c)); }

/// Picks the three nearest landmarks within `detect_range`, skipping triples
/// whose triangle area is below kMinAnchorTriangleArea. Triples are tried in
/// lexicographic order of nearness rank.
inline std::array<Landmark, 3> select_trilateration_set(Point2 position,
                                                       std::span<const Landmark> landmarks,
                                                       double detect_range) {
  struct Ranked {
    double dist;
    const Landmark* lm;
  };
  std::vector<Ranked> in_range;
  for (const Landmark& lm : landmarks) {
    const double d = distance(position, lm.position);
    if (d <= detect_range) in_range.push_back({d, &lm});
  }
  if (in_range.size() < 3) {
    throw Error(ErrorCode::InsufficientAnchors,
                std::to_string(in_range.size()) + " landmark(s) within detection range");
  }
  std::sort(in_range.begin(), in_range.end(), [](const Ranked& a, const Ranked& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.lm->id < b.lm->id);
  });

  const std::size_t n = in_range.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const Landmark& a = *in_range[i].lm;
        const Landmark& b = *in_range[j].lm;
        const Landmark& c = *in_range[k].lm;
        if (triangle_area(a.position, b.position, c.position) >= kMinAnchorTriangleArea) {
          return {a, b, c};
        }
      }
    }
  }
  throw Error(ErrorCode::DegenerateGeometry, "every in-range anchor triple is near-collinear");
}

/// Noisy ranges to each anchor: true distance plus N(0, sigma_range), floored at 0.
template <class Rng>
std::vector<RangeMeasurement> simulate_ranges(Point2 position, std::span<const Landmark> anchors,
                                              const MeasurementNoise& noise, Rng& rng) {
  if (anchors.empty()) throw Error(ErrorCode::InvalidArgument, "no anchors to range against");
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<RangeMeasurement> out;
  out.reserve(anchors.size());
  for (const Landmark& lm : anchors) {
    const double d = distance(position, lm.position) + noise.sigma_range * unit(rng);
    out.push_back({lm.id, std::max(0.0, d)});
  }
  return out;
}

namespace detail {

inline void check_pairing(std::span<const Landmark> anchors, std::span<const RangeMeasurement> ranges) {
  if (anchors.size() != ranges.size()) {
    throw Error(ErrorCode::InvalidArgument, "anchors and ranges differ in count");
  }
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (anchors[i].id != ranges[i].landmark_id) {
      throw Error(ErrorCode::InvalidArgument, "range " + std::to_string(i) +
                                                  " is not paired with its anchor");
    }
  }
}

}  // namespace detail

/// Linearised trilateration: subtracting the first circle equation from the
/// others gives A p = b, solved through the 2x2 normal equations.
inline Point2 trilaterate_linear(std::span<const Landmark> anchors,
                                 std::span<const RangeMeasurement> ranges) {
  detail::check_pairing(anchors, ranges);
  if (anchors.size() < 3) {
    throw Error(ErrorCode::InsufficientAnchors, "trilateration needs 3 anchors");
  }
  // Work relative to the first anchor to keep the system well scaled.
  const Point2 ref = anchors[0].position;
  const double d0 = ranges[0].distance;
  double ata00 = 0, ata01 = 0, ata11 = 0, atb0 = 0, atb1 = 0;
  double scale = 0;
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    const Point2 li = anchors[i].position - ref;
    const double di = ranges[i].distance;
    const double a0 = 2.0 * li.x;
    const double a1 = 2.0 * li.y;
    const double b = d0 * d0 - di * di + squared_norm(li);
    ata00 += a0 * a0;
    ata01 += a0 * a1;
    ata11 += a1 * a1;
    atb0 += a0 * b;
    atb1 += a1 * b;
    scale = std::max(scale, squared_norm(li));
  }
  const double det = ata00 * ata11 - ata01 * ata01;
  // det scales with |l|^4; compare against that scale.
  if (!(std::abs(det) > 1e-12 * 16.0 * scale * scale) || scale == 0.0) {
    throw Error(ErrorCode::DegenerateGeometry, "anchors are collinear; normal system is singular");
  }
  const double x = (ata11 * atb0 - ata01 * atb1) / det;
  const double y = (ata00 * atb1 - ata01 * atb0) / det;
  return ref + Point2{x, y};
}

/// Sum of squared range residuals, sum_i (|p - L_i| - d_i)^2.
inline double range_residual_cost(Point2 p, std::span<const Landmark> anchors,
                                  std::span<const RangeMeasurement> ranges) {
  double cost = 0.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double r = distance(p, anchors[i].position) - ranges[i].distance;
    cost += r * r;
  }
  return cost;
}

inline Point2 range_residual_gradient(Point2 p, std::span<const Landmark> anchors,
                                      std::span<const RangeMeasurement> ranges) {
  Point2 g{};
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const Point2 delta = p - anchors[i].position;
    const double dist = norm(delta);
    if (dist == 0.0) continue;  // subgradient 0 at the anchor itself
    g = g + delta * (2.0 * (dist - ranges[i].distance) / dist);
  }
  return g;
}

struct RefineOptions {
  int max_iterations{200};
  double gradient_tolerance{1e-9};
  double convergence_flag_tolerance{1e-6};
  int history{5};
};

struct RefinementResult {
  Point2 position;
  double initial_cost{0.0};
  double final_cost{0.0};
  double gradient_norm{0.0};
  int iterations{0};
  /// False when the iteration cap was hit with the gradient still above
  /// convergence_flag_tolerance. The position is still the best found.
  bool converged{true};
};

/// Limited-memory BFGS on the range residual cost with a backtracking
/// (Armijo) line search, so the returned cost never exceeds the initial one.
inline RefinementResult refine_position(Point2 initial, std::span<const Landmark> anchors,
                                        std::span<const RangeMeasurement> ranges,
                                        const RefineOptions& opts = {}) {
  detail::check_pairing(anchors, ranges);
  if (!is_finite(initial)) throw Error(ErrorCode::InvalidArgument, "initial estimate not finite");

  auto cost = [&](Point2 p) { return range_residual_cost(p, anchors, ranges); };
  auto grad = [&](Point2 p) { return range_residual_gradient(p, anchors, ranges); };

  RefinementResult res;
  Point2 x = initial;
  double fx = cost(x);
  Point2 g = grad(x);
  res.initial_cost = fx;

  std::vector<Point2> s_hist, y_hist;
  std::vector<double> rho_hist;
  int it = 0;
  for (; it < opts.max_iterations && norm(g) > opts.gradient_tolerance; ++it) {
    // Two-loop recursion for the quasi-Newton direction.
    Point2 q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * dot(s_hist[i], q);
      q = q - y_hist[i] * alpha[i];
    }
    if (!s_hist.empty()) {
      const double gamma = dot(s_hist.back(), y_hist.back()) / squared_norm(y_hist.back());
      q = q * gamma;
    } else {
      q = q * (1.0 / std::max(1.0, norm(g)));
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], q);
      q = q + s_hist[i] * (alpha[i] - beta);
    }
    Point2 dir = q * -1.0;
    double slope = dot(g, dir);
    if (!(slope < 0.0)) {
      // Lost descent; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = g * (-1.0 / std::max(1.0, norm(g)));
      slope = dot(g, dir);
    }

    double t = 1.0;
    Point2 x_new = x + dir * t;
    double f_new = cost(x_new);
    int backtracks = 0;
    while (!(f_new <= fx + 1e-4 * t * slope) && backtracks < 60) {
      t *= 0.5;
      x_new = x + dir * t;
      f_new = cost(x_new);
      ++backtracks;
    }
    if (!(f_new <= fx)) break;  // no decrease possible at machine precision

    const Point2 g_new = grad(x_new);
    const Point2 s = x_new - x;
    const Point2 y = g_new - g;
    const double sy = dot(s, y);
    if (sy > 1e-18) {
      if (static_cast<int>(s_hist.size()) == opts.history) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
    }
    const bool stalled = s == Point2{};
    x = x_new;
    fx = f_new;
    g = g_new;
    if (stalled) break;
  }

  res.position = x;
  res.final_cost = fx;
  res.gradient_norm = norm(g);
  res.iterations = it;
  res.converged = !(it >= opts.max_iterations && res.gradient_norm > opts.convergence_flag_tolerance);
  return res;
}

/// Position and speed fix as delivered to the navigator: (x, y, v).
struct LocalizationFix {
  Point2 position;
  double speed{0.0};
  std::array<Landmark, 3> anchors;
  bool refined_converged{true};
};

/// Simulated landmark localization: choose anchors, range them with noise,
/// trilaterate, then refine. Speed comes from a separate noisy sensor.
template <class Rng>
LocalizationFix lanbloc_measure(const EntityState& truth, std::span<const Landmark> landmarks,
                                double detect_range, const MeasurementNoise& noise, Rng& rng) {
  LocalizationFix fix;
  fix.anchors = select_trilateration_set(truth.position, landmarks, detect_range);
  const auto ranges = simulate_ranges(truth.position, fix.anchors, noise, rng);
  const Point2 linear = trilaterate_linear(fix.anchors, ranges);
  const RefinementResult refined = refine_position(linear, fix.anchors, ranges);
  std::normal_distribution<double> unit(0.0, 1.0);
  fix.position = refined.position;
  fix.speed = truth.velocity + noise.sigma_speed * unit(rng);
  fix.refined_converged = refined.converged;
  return fix;
}

/// Empirical error of lanbloc_measure over a set of true positions.
struct FixErrorStats {
  double rmse_x{0.0};
  double rmse_y{0.0};
  double mean_x{0.0};
  double mean_y{0.0};
  double rmse_speed{0.0};
  std::size_t fixes{0};
  std::size_t failures{0};  // positions without a usable anchor triple
};

template <class Rng>
FixErrorStats measure_fix_error(std::span<const Point2> positions, std::span<const Landmark> landmarks,
                                double detect_range, const MeasurementNoise& noise, double speed,
                                Rng& rng) {
  FixErrorStats st;
  double sx = 0, sy = 0, sxx = 0, syy = 0, svv = 0;
  for (const Point2& p : positions) {
    try {
      const LocalizationFix fix = lanbloc_measure(EntityState{p, speed, 0.0}, landmarks, detect_range, noise, rng);
      const double ex = fix.position.x - p.x;
      const double ey = fix.position.y - p.y;
      const double ev = fix.speed - speed;
      sx += ex;
      sy += ey;
      sxx += ex * ex;
      syy += ey * ey;
      svv += ev * ev;
      ++st.fixes;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientAnchors && e.code() != ErrorCode::DegenerateGeometry) throw;
      ++st.failures;
    }
  }
  if (st.fixes > 0) {
    const double n = static_cast<double>(st.fixes);
    st.mean_x = sx / n;
    st.mean_y = sy / n;
    st.rmse_x = std::sqrt(sxx / n);
    st.rmse_y = std::sqrt(syy / n);
    st.rmse_speed = std::sqrt(svv / n);
  }
  return st;
}

}  // namespace secnav
