#pragma once
// Independent oracles and random inputs shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <vector>

#include "secnav/ekf.hpp"
#include "secnav/geometry.hpp"
#include "secnav/localization.hpp"

namespace secnav {

inline void PrintTo(const Point2& p, std::ostream* os) { *os << "(" << p.x << ", " << p.y << ")"; }

}  // namespace secnav

namespace secnav::oracle {

/// Hull vertices by exhaustive edge search: i -> j is a hull edge iff every
/// other point lies strictly left of it or strictly inside the segment.
/// Returns CCW vertices starting at the lowest (then leftmost) point, or an
/// empty vector when the input is degenerate.
inline std::vector<Point2> extreme_point_oracle(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return {};
  auto orient = [](Point2 o, Point2 a, Point2 b) {
    const long double ax = static_cast<long double>(a.x) - o.x, ay = static_cast<long double>(a.y) - o.y;
    const long double bx = static_cast<long double>(b.x) - o.x, by = static_cast<long double>(b.y) - o.y;
    return ax * by - ay * bx;
  };
  std::map<std::size_t, std::size_t> next;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      bool edge = true;
      for (std::size_t k = 0; k < n && edge; ++k) {
        if (k == i || k == j) continue;
        const long double o = orient(pts[i], pts[j], pts[k]);
        if (o > 0) continue;
        if (o < 0) {
          edge = false;
        } else {
          const bool inside = dot(pts[k] - pts[i], pts[j] - pts[i]) > 0 && dot(pts[k] - pts[j], pts[i] - pts[j]) > 0;
          edge = inside;
        }
      }
      if (edge) next[i] = j;
    }
  }
  if (next.size() < 3) return {};
  std::size_t start = next.begin()->first;
  for (const auto& [i, j] : next) {
    if (pts[i].y < pts[start].y || (pts[i].y == pts[start].y && pts[i].x < pts[start].x)) start = i;
  }
  std::vector<Point2> out{pts[start]};
  for (std::size_t cur = next.at(start); cur != start; cur = next.at(cur)) {
    out.push_back(pts[cur]);
    if (out.size() > n) return {};
  }
  return out;
}

/// Inside-or-on test from the signed distance to every CCW edge, in long
/// double.
inline bool half_plane_oracle(Point2 p, std::span<const Point2> ccw, double eps = kBoundaryEpsilon) {
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Point2 a = ccw[i];
    const Point2 b = ccw[(i + 1) % ccw.size()];
    const long double ex = static_cast<long double>(b.x) - a.x, ey = static_cast<long double>(b.y) - a.y;
    const long double px = static_cast<long double>(p.x) - a.x, py = static_cast<long double>(p.y) - a.y;
    const long double d = (ex * py - ey * px) / std::sqrt(ex * ex + ey * ey);
    if (d < -static_cast<long double>(eps)) return false;
  }
  return true;
}

enum class CloudKind { Uniform, Grid, Circle, Clustered };

/// Random point cloud of `n` points. Grid and circle clouds are rich in
/// collinear triples and duplicates.
template <class Rng>
std::vector<Point2> random_cloud(std::size_t n, CloudKind kind, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_int_distribution<int> g(0, 12);
  std::normal_distribution<double> gauss(0.0, 3.0);
  std::vector<Point2> pts;
  pts.reserve(n);
  while (pts.size() < n) {
    switch (kind) {
      case CloudKind::Uniform: pts.push_back({u(rng), u(rng)}); break;
      case CloudKind::Grid: pts.push_back({static_cast<double>(g(rng)), static_cast<double>(g(rng))}); break;
      case CloudKind::Circle: {
        const double a = 2 * std::numbers::pi * static_cast<double>(g(rng) % 12) / 12.0;
        const double r = g(rng) < 8 ? 40.0 : u(rng) * 0.3;
        pts.push_back({50 + r * std::cos(a), 50 + r * std::sin(a)});
        break;
      }
      case CloudKind::Clustered: pts.push_back({50 + gauss(rng), 50 + gauss(rng) * 0.2}); break;
    }
  }
  return pts;
}

/// True when the cloud has at least 3 points that are not all collinear.
inline bool non_degenerate(const std::vector<Point2>& pts) { return !extreme_point_oracle(pts).empty(); }

inline double smallest_angle(Point2 a, Point2 b, Point2 c) {
  auto at = [](Point2 o, Point2 p, Point2 q) {
    return std::acos(std::clamp(dot(p - o, q - o) / (distance(p, o) * distance(q, o)), -1.0, 1.0));
  };
  return std::min({at(a, b, c), at(b, c, a), at(c, a, b)});
}

/// Three anchors in a 100 m square whose triangle has every angle at least
/// `min_angle`, and a uniform point inside that triangle.
struct AnchorLayout {
  std::vector<Landmark> anchors;
  Point2 inside;
};

template <class Rng>
AnchorLayout surrounded_layout(Rng& rng, double min_angle = std::numbers::pi / 6) {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    if (triangle_area(a, b, c) < kMinAnchorTriangleArea || smallest_angle(a, b, c) < min_angle) continue;
    double r1 = unit(rng), r2 = unit(rng);
    if (r1 + r2 > 1) {
      r1 = 1 - r1;
      r2 = 1 - r2;
    }
    return {{{0, a, 0}, {1, b, 0}, {2, c, 0}}, a + (b - a) * r1 + (c - a) * r2};
  }
}

/// Central-difference Jacobian of the motion transition.
inline StateCovariance numeric_jacobian(const StateVector& x, const ControlInput& u, const MotionParams& p,
                                        double h = 1e-6) {
  StateCovariance J;
  for (int c = 0; c < 4; ++c) {
    StateVector xp = x, xm = x;
    xp(c) += h;
    xm(c) -= h;
    StateVector diff = transition(xp, u, p) - transition(xm, u, p);
    diff(3) = normalize_angle(diff(3));
    J.col(c) = diff / (2 * h);
  }
  return J;
}

}  // namespace secnav::oracle
