#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "secnav/error.hpp"
#include "secnav/geometry.hpp"

namespace secnav {

/// Safe path split into sequenced segments, each bounded by its convex hull.
struct SafeCorridor {
  std::vector<PathSegment> segments;
  std::vector<ConvexHullPolygon> hulls;
  std::vector<Point2> centroids;

  std::size_t size() const { return hulls.size(); }

  /// Builds hulls (Chan) and centroids for the given segments and checks that
  /// consecutive hulls touch.
  static SafeCorridor from_segments(std::vector<PathSegment> segments) {
    SafeCorridor c;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (segments[i].sequence_index != i) {
        throw Error(ErrorCode::InvalidArgument, "segment sequence indices must be 0..n-1 in order");
      }
      c.hulls.push_back(chan_hull(segments[i].points));
      c.centroids.push_back(polygon_centroid(c.hulls.back()));
    }
    c.segments = std::move(segments);
    c.validate();
    return c;
  }

  void validate() const {
    if (segments.size() != hulls.size() || hulls.size() != centroids.size()) {
      throw Error(ErrorCode::InvalidArgument, "corridor segment/hull/centroid counts differ");
    }
    for (std::size_t i = 0; i + 1 < hulls.size(); ++i) {
      if (!hulls_connected(hulls[i], hulls[i + 1])) {
        throw Error(ErrorCode::DisconnectedCorridor,
                    "hulls " + std::to_string(i) + " and " + std::to_string(i + 1) + " do not touch");
      }
    }
  }

  /// Index of the first hull containing p, or size() if none does.
  std::size_t locate(Point2 p) const {
    for (std::size_t i = 0; i < hulls.size(); ++i) {
      if (point_in_convex_hull(p, hulls[i])) return i;
    }
    return hulls.size();
  }

  bool contains(Point2 p) const { return locate(p) < hulls.size(); }
};

}  // namespace secnav
