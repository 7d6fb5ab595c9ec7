#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "secnav/error.hpp"

namespace secnav {

/// Orientation tests treat |cross| <= this as collinear.
inline constexpr double kCollinearTolerance = 1e-12;
/// Signed edge distance above -this counts as inside a hull.
inline constexpr double kBoundaryEpsilon = 1e-9;

struct Point2 {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
inline Point2 operator*(double s, Point2 a) { return a * s; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double squared_norm(Point2 a) { return dot(a, a); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Twice the signed area of triangle (o, a, b); positive for a left turn.
inline double orient2d(Point2 o, Point2 a, Point2 b) { return cross(a - o, b - o); }

enum class Turn { Right = -1, Straight = 0, Left = 1 };

// Collinear when the cross product is within the tolerance scaled by the two
// arm lengths (floored at the bare tolerance), i.e. when the sine of the
// angle at `o` is below 1e-12. A bare absolute bound sits under the rounding
// noise once coordinates reach the hundreds.
inline Turn turn(Point2 o, Point2 a, Point2 b) {
  const Point2 u = a - o;
  const Point2 v = b - o;
  const double c = cross(u, v);
  const double tol = kCollinearTolerance * std::max(1.0, std::sqrt(squared_norm(u) * squared_norm(v)));
  if (c > tol) return Turn::Left;
  if (c < -tol) return Turn::Right;
  return Turn::Straight;
}

/// Strictly convex polygon, counter-clockwise, first vertex is the lowest
/// (then leftmost) one.
class ConvexHullPolygon {
 public:
  ConvexHullPolygon() = default;

  /// Validates convexity and orientation. Rotates the sequence so it starts
  /// at the lowest-y vertex.
  static ConvexHullPolygon from_vertices(std::vector<Point2> vertices) {
    if (vertices.size() < 3) {
      throw Error(ErrorCode::DegenerateInput, "hull needs at least 3 vertices");
    }
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_finite(vertices[i])) {
        throw Error(ErrorCode::InvalidArgument, "hull vertex is not finite");
      }
      if (turn(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) != Turn::Left) {
        throw Error(ErrorCode::DegenerateInput,
                    "hull vertices are not strictly convex counter-clockwise");
      }
    }
    auto lowest = std::min_element(vertices.begin(), vertices.end(), [](Point2 a, Point2 b) {
      return a.y < b.y || (a.y == b.y && a.x < b.x);
    });
    std::rotate(vertices.begin(), lowest, vertices.end());
    ConvexHullPolygon hull;
    hull.vertices_ = std::move(vertices);
    return hull;
  }

  std::span<const Point2> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Point2& operator[](std::size_t i) const { return vertices_[i]; }

  friend bool operator==(const ConvexHullPolygon&, const ConvexHullPolygon&) = default;

 private:
  std::vector<Point2> vertices_;
};

/// Corridor sample points belonging to one stretch of a safe path.
struct PathSegment {
  std::vector<Point2> points;
  std::size_t sequence_index{0};
};

namespace detail {

inline bool lower_left(Point2 a, Point2 b) { return a.y < b.y || (a.y == b.y && a.x < b.x); }

// Points closer than this are merged before any hull is built.
inline constexpr double kMergeDistance = 1e-9;

// Sorted (x, then y) copy with points within kMergeDistance of an earlier
// kept point removed.
inline std::vector<Point2> unique_points(std::span<const Point2> points) {
  std::vector<Point2> sorted(points.begin(), points.end());
  for (const Point2& p : sorted) {
    if (!is_finite(p)) throw Error(ErrorCode::InvalidArgument, "point is not finite");
  }
  std::sort(sorted.begin(), sorted.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<Point2> out;
  out.reserve(sorted.size());
  for (const Point2& p : sorted) {
    bool duplicate = false;
    for (auto it = out.rbegin(); it != out.rend() && p.x - it->x <= kMergeDistance; ++it) {
      if (std::abs(p.y - it->y) <= kMergeDistance) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(p);
  }
  return out;
}

// Drops vertices that do not make a strict left turn with their cyclic
// neighbours. The absolute tolerance depends on edge length, so a vertex
// that beat a distant candidate can still be flat against its neighbours.
inline void drop_flat_vertices(std::vector<Point2>& hull) {
  for (bool changed = true; changed && hull.size() >= 3;) {
    changed = false;
    for (std::size_t i = 0; i < hull.size() && hull.size() >= 3; ++i) {
      const std::size_t n = hull.size();
      if (turn(hull[(i + n - 1) % n], hull[i], hull[(i + 1) % n]) != Turn::Left) {
        hull.erase(hull.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
}

// Graham scan over deduplicated points. Returns the strict hull in CCW order
// from the lowest-then-leftmost point; for degenerate input the result has
// fewer than 3 vertices (a single point or the two ends of a segment).
inline std::vector<Point2> graham_vertices(std::vector<Point2> pts) {
  if (pts.size() < 3) return pts;

  auto pivot_it = std::min_element(pts.begin(), pts.end(), lower_left);
  std::iter_swap(pts.begin(), pivot_it);
  const Point2 pivot = pts.front();

  // Sort on exact keys: a comparator built on the tolerant turn() is not a
  // strict weak ordering for nearly collinear points.
  struct Keyed {
    double angle;
    double dist2;
    Point2 p;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(pts.size() - 1);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Point2 d = pts[i] - pivot;
    keyed.push_back({std::atan2(d.y, d.x), squared_norm(d), pts[i]});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.angle < b.angle || (a.angle == b.angle && a.dist2 < b.dist2);
  });

  // Of several points on one ray from the pivot only the farthest can be a
  // strict hull vertex.
  std::vector<Point2> rays;
  rays.reserve(pts.size());
  rays.push_back(pivot);
  for (const Keyed& k : keyed) {
    if (rays.size() > 1 && turn(pivot, rays.back(), k.p) == Turn::Straight) {
      if (squared_norm(k.p - pivot) > squared_norm(rays.back() - pivot)) rays.back() = k.p;
    } else {
      rays.push_back(k.p);
    }
  }
  if (rays.size() < 3) return rays;

  std::vector<Point2> stack;
  stack.reserve(rays.size());
  for (const Point2& p : rays) {
    while (stack.size() >= 2 && turn(stack[stack.size() - 2], stack.back(), p) != Turn::Left) {
      stack.pop_back();
    }
    stack.push_back(p);
  }
  drop_flat_vertices(stack);
  return stack;
}

inline void require_non_degenerate(const std::vector<Point2>& hull_vertices) {
  if (hull_vertices.size() < 3) {
    throw Error(ErrorCode::DegenerateInput,
                "need at least 3 distinct points that are not all collinear");
  }
}

// True when `candidate` should replace `best` as the next Jarvis vertex after
// `from`: it lies clockwise of from->best, or on that ray but farther out.
// Collinear candidates on opposite rays are told apart by `heading`, the
// direction of the edge that reached `from`: the one ahead wins.
inline bool more_clockwise(Point2 from, Point2 best, Point2 candidate, Point2 heading) {
  const Turn t = turn(from, best, candidate);
  if (t == Turn::Right) return true;
  if (t == Turn::Left) return false;
  if (dot(candidate - from, best - from) < 0) return dot(candidate - from, heading) > dot(best - from, heading);
  return squared_norm(candidate - from) > squared_norm(best - from);
}

// Vertex of the CCW polygon `hull` that every other hull point lies left of
// (or on) when seen from `from`. Binary search over the polygon, with a
// linear scan for tiny hulls and for any result that fails the local check.
inline std::size_t tangent_index(std::span<const Point2> hull, Point2 from, Point2 heading) {
  const std::size_t n = hull.size();
  auto linear = [&]() {
    std::size_t best = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (hull[best] == from || (!(hull[i] == from) && more_clockwise(from, hull[best], hull[i], heading))) {
        best = i;
      }
    }
    return best;
  };
  if (n <= 3) return linear();

  for (std::size_t i = 0; i < n; ++i) {
    if (hull[i] == from) return (i + 1) % n;
  }

  auto prev = [n](std::size_t i) { return (i + n - 1) % n; };
  auto next = [n](std::size_t i) { return (i + 1) % n; };
  auto is_tangent = [&](std::size_t i) {
    return turn(from, hull[i], hull[prev(i)]) != Turn::Right &&
           turn(from, hull[i], hull[next(i)]) != Turn::Right;
  };

  std::size_t lo = 0;
  std::size_t hi = n;
  Turn lo_prev = turn(from, hull[0], hull[n - 1]);
  Turn lo_next = turn(from, hull[0], hull[1]);
  std::optional<std::size_t> found;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const Turn mid_prev = turn(from, hull[mid], hull[prev(mid)]);
    const Turn mid_next = turn(from, hull[mid], hull[next(mid)]);
    const Turn mid_side = turn(from, hull[lo], hull[mid]);
    if (mid_prev != Turn::Right && mid_next != Turn::Right) {
      found = mid;
      break;
    }
    if ((mid_side == Turn::Left && (lo_next == Turn::Right || lo_prev == lo_next)) ||
        (mid_side == Turn::Right && mid_prev == Turn::Right)) {
      hi = mid;
    } else {
      lo = mid + 1;
      if (lo >= n) break;
      lo_prev = turn(from, hull[lo], hull[prev(lo)]);
      lo_next = turn(from, hull[lo], hull[next(lo)]);
    }
  }
  if (!found && lo < n && is_tangent(lo)) found = lo;
  if (!found || !is_tangent(*found)) return linear();

  // The tolerant turn test can accept a vertex short of the true tangent on a
  // nearly collinear run, so climb while a neighbour is more clockwise.
  std::size_t best = *found;
  for (std::size_t guard = 0; guard < n; ++guard) {
    if (more_clockwise(from, hull[best], hull[next(best)], heading)) {
      best = next(best);
    } else if (more_clockwise(from, hull[best], hull[prev(best)], heading)) {
      best = prev(best);
    } else {
      break;
    }
  }
  return best;
}

}  // namespace detail

/// Graham scan. Collinear boundary points are dropped.
inline ConvexHullPolygon graham_scan(std::span<const Point2> points) {
  std::vector<Point2> hull = detail::graham_vertices(detail::unique_points(points));
  detail::require_non_degenerate(hull);
  return ConvexHullPolygon::from_vertices(std::move(hull));
}

/// Chan's output-sensitive hull: Graham scan on groups of size m, then a
/// Jarvis march over the group hulls limited to m wrapping steps. The group
/// size starts at 4 and doubles after every failed march.
inline ConvexHullPolygon chan_hull(std::span<const Point2> points) {
  const std::vector<Point2> pts = detail::unique_points(points);
  if (pts.size() < 3) detail::require_non_degenerate(pts);

  // Leftmost point (lowest y on ties) is always a strict hull vertex.
  const Point2 start = *std::min_element(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });

  for (std::size_t m = 4;; m = std::min(2 * m, pts.size())) {
    std::vector<std::vector<Point2>> groups;
    for (std::size_t begin = 0; begin < pts.size(); begin += m) {
      const std::size_t end = std::min(begin + m, pts.size());
      groups.push_back(detail::graham_vertices({pts.begin() + begin, pts.begin() + end}));
    }

    std::vector<Point2> hull{start};
    bool closed = false;
    for (std::size_t step = 0; step < m; ++step) {
      const Point2 from = hull.back();
      // Nothing lies left of the start, so the march begins heading down.
      const Point2 heading = hull.size() > 1 ? from - hull[hull.size() - 2] : Point2{0, -1};
      std::optional<Point2> best;
      for (const auto& group : groups) {
        const Point2 candidate = group[detail::tangent_index(group, from, heading)];
        if (candidate == from) continue;
        if (!best || detail::more_clockwise(from, *best, candidate, heading)) best = candidate;
      }
      if (!best) break;  // every point coincides with `from`
      if (*best == start) {
        closed = true;
        break;
      }
      hull.push_back(*best);
    }

    if (closed) {
      detail::drop_flat_vertices(hull);
      detail::require_non_degenerate(hull);
      return ConvexHullPolygon::from_vertices(std::move(hull));
    }
    if (m >= pts.size()) {
      // A full-size march that does not close means every point is collinear.
      detail::require_non_degenerate({});
    }
  }
}

/// Signed distance of p from the directed edge a->b (positive on the left).
inline double signed_edge_distance(Point2 p, Point2 a, Point2 b) {
  const double len = distance(a, b);
  return orient2d(a, b, p) / len;
}

/// Half-plane test against every CCW edge; boundary (within kBoundaryEpsilon)
/// counts as inside.
inline bool point_in_convex_hull(Point2 p, const ConvexHullPolygon& hull) {
  const auto v = hull.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (signed_edge_distance(p, v[i], v[(i + 1) % v.size()]) < -kBoundaryEpsilon) return false;
  }
  return true;
}

/// Even-odd (crossing number) test for a general simple polygon. Points on
/// the boundary are reported inconsistently by this rule; callers that need
/// boundary inclusion should use point_in_convex_hull.
inline bool point_in_polygon_even_odd(Point2 p, std::span<const Point2> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = polygon[i];
    const Point2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

inline double polygon_area(const ConvexHullPolygon& hull) {
  const auto v = hull.vertices();
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) twice += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * twice;
}

/// Area-weighted centroid (shoelace), computed relative to the first vertex
/// to limit cancellation.
inline Point2 polygon_centroid(const ConvexHullPolygon& hull) {
  const auto v = hull.vertices();
  const Point2 origin = v[0];
  double twice_area = 0.0;
  Point2 acc{};
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const Point2 a = v[i] - origin;
    const Point2 b = v[i + 1] - origin;
    const double w = cross(a, b);
    twice_area += w;
    acc = acc + (a + b) * w;
  }
  return origin + acc * (1.0 / (3.0 * twice_area));
}

/// True when the hulls overlap or touch.
inline bool hulls_connected(const ConvexHullPolygon& a, const ConvexHullPolygon& b) {
  for (const Point2& p : a.vertices()) {
    if (point_in_convex_hull(p, b)) return true;
  }
  for (const Point2& p : b.vertices()) {
    if (point_in_convex_hull(p, a)) return true;
  }
  auto segments_cross = [](Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
    const double d1 = orient2d(q1, q2, p1);
    const double d2 = orient2d(q1, q2, p2);
    const double d3 = orient2d(p1, p2, q1);
    const double d4 = orient2d(p1, p2, q2);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
  };
  const auto va = a.vertices();
  const auto vb = b.vertices();
  for (std::size_t i = 0; i < va.size(); ++i) {
    for (std::size_t j = 0; j < vb.size(); ++j) {
      if (segments_cross(va[i], va[(i + 1) % va.size()], vb[j], vb[(j + 1) % vb.size()])) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace secnav
