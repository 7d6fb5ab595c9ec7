#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "secnav/geometry.hpp"
#include "support.hpp"

using namespace secnav;
using secnav::oracle::CloudKind;

namespace {

std::vector<Point2> as_vector(const ConvexHullPolygon& h) { return {h.vertices().begin(), h.vertices().end()}; }

const std::vector<Point2> kSquareWithCenter{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}};

}  // namespace

TEST(GrahamScan, DropsInteriorPoint) {
  const std::vector<Point2> want{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_EQ(as_vector(graham_scan(kSquareWithCenter)), want);
}

TEST(GrahamScan, TriangleIsItsOwnHull) {
  const std::vector<Point2> tri{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_EQ(as_vector(graham_scan(tri)), tri);
}

TEST(GrahamScan, LowestThenLeftmostPivot) {
  const std::vector<Point2> pts{{3, 0}, {1, 0}, {2, 2}, {5, 1}};
  EXPECT_EQ(graham_scan(pts)[0], (Point2{1, 0}));
}

TEST(GrahamScan, CollinearBoundaryPointsExcluded) {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  const std::vector<Point2> want{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_EQ(as_vector(graham_scan(pts)), want);
}

TEST(GrahamScan, DuplicatesIgnored) {
  const std::vector<Point2> pts{{0, 0}, {0, 0}, {4, 0}, {4, 0}, {2, 3}};
  EXPECT_EQ(graham_scan(pts).size(), 3u);
}

TEST(GrahamScan, DegenerateInputs) {
  const std::vector<Point2> two{{0, 0}, {1, 1}};
  const std::vector<Point2> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  const std::vector<Point2> same{{1, 1}, {1, 1}, {1, 1}};
  for (const auto& pts : {two, line, same}) {
    try {
      graham_scan(pts);
      FAIL() << "expected DegenerateInput";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
    }
  }
}

TEST(GrahamScan, MatchesExtremePointOracleOnRandomCloud) {
  std::mt19937_64 rng(11);
  const auto pts = oracle::random_cloud(200, CloudKind::Uniform, rng);
  EXPECT_EQ(as_vector(graham_scan(pts)), oracle::extreme_point_oracle(pts));
}

TEST(ChanHull, SquareWithCenter) {
  const std::vector<Point2> want{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_EQ(as_vector(chan_hull(kSquareWithCenter)), want);
}

TEST(ChanHull, Triangle) {
  const std::vector<Point2> tri{{0, 0}, {4, 0}, {2, 3}};
  EXPECT_EQ(as_vector(chan_hull(tri)), tri);
}

TEST(ChanHull, DegenerateInputs) {
  const std::vector<Point2> line{{0, 0}, {1, 0}, {2, 0}, {5, 0}, {3, 0}, {9, 0}};
  try {
    chan_hull(line);
    FAIL() << "expected DegenerateInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
  }
}

TEST(ChanHull, EqualsGrahamOn500Points) {
  std::mt19937_64 rng(12);
  const auto pts = oracle::random_cloud(500, CloudKind::Uniform, rng);
  EXPECT_EQ(as_vector(chan_hull(pts)), as_vector(graham_scan(pts)));
}

TEST(HullProperties, RandomCloudsAllKinds) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> size(3, 120);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto kind = static_cast<CloudKind>(trial % 4);
    const auto pts = oracle::random_cloud(size(rng), kind, rng);
    const auto want = oracle::extreme_point_oracle(pts);
    if (want.empty()) continue;
    ++checked;
    const auto g = graham_scan(pts);
    const auto c = chan_hull(pts);
    ASSERT_EQ(as_vector(g), want) << "trial " << trial;
    ASSERT_EQ(as_vector(c), want) << "trial " << trial;
    // Strict convexity.
    const auto v = g.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_GT(orient2d(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]), 0.0);
    }
    // Every input point is covered.
    for (Point2 q : pts) EXPECT_TRUE(point_in_convex_hull(q, g));
  }
  EXPECT_GT(checked, 350);
}

TEST(PointInConvexHull, CentroidAndVertices) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const auto hull = graham_scan(oracle::random_cloud(30, CloudKind::Uniform, rng));
    Point2 mean{};
    for (Point2 v : hull.vertices()) mean = mean + v;
    EXPECT_TRUE(point_in_convex_hull(mean * (1.0 / static_cast<double>(hull.size())), hull));
    for (Point2 v : hull.vertices()) EXPECT_TRUE(point_in_convex_hull(v, hull));
  }
}

TEST(PointInConvexHull, BoundaryEpsilon) {
  const auto hull = graham_scan(kSquareWithCenter);
  EXPECT_TRUE(point_in_convex_hull({1, 0}, hull));
  EXPECT_TRUE(point_in_convex_hull({1, -0.5e-9}, hull));
  EXPECT_FALSE(point_in_convex_hull({1, -2e-9}, hull));
  EXPECT_FALSE(point_in_convex_hull({3, 1}, hull));
}

TEST(PointInConvexHull, MatchesHalfPlaneOracle) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-10.0, 110.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto hull = graham_scan(oracle::random_cloud(40, CloudKind::Uniform, rng));
    const auto v = hull.vertices();
    for (int k = 0; k < 1000; ++k) {
      Point2 p{u(rng), u(rng)};
      if (k % 4 == 0) {
        const std::size_t e = static_cast<std::size_t>(k / 4) % v.size();
        p = v[e] + (v[(e + 1) % v.size()] - v[e]) * unit(rng);
      }
      ASSERT_EQ(point_in_convex_hull(p, hull), oracle::half_plane_oracle(p, v)) << p.x << "," << p.y;
    }
  }
}

TEST(PointInConvexHull, AgreesWithEvenOddAwayFromBoundary) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-10.0, 110.0);
  const auto hull = graham_scan(oracle::random_cloud(60, CloudKind::Uniform, rng));
  const auto v = hull.vertices();
  for (int k = 0; k < 5000; ++k) {
    const Point2 p{u(rng), u(rng)};
    double nearest = 1e300;
    for (std::size_t i = 0; i < v.size(); ++i) {
      nearest = std::min(nearest, std::abs(signed_edge_distance(p, v[i], v[(i + 1) % v.size()])));
    }
    if (nearest < 1e-6) continue;
    EXPECT_EQ(point_in_convex_hull(p, hull), point_in_polygon_even_odd(p, v));
  }
}

TEST(PolygonCentroid, Examples) {
  const auto square = graham_scan(std::vector<Point2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const Point2 c = polygon_centroid(square);
  EXPECT_DOUBLE_EQ(c.x, 0.5);
  EXPECT_DOUBLE_EQ(c.y, 0.5);
  const auto tri = graham_scan(std::vector<Point2>{{0, 0}, {3, 0}, {0, 3}});
  const Point2 t = polygon_centroid(tri);
  EXPECT_NEAR(t.x, 1.0, 1e-15);
  EXPECT_NEAR(t.y, 1.0, 1e-15);
}

TEST(PolygonCentroid, RandomHullContainsCentroid) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto hull = graham_scan(oracle::random_cloud(25, static_cast<CloudKind>(trial % 4), rng));
    EXPECT_TRUE(point_in_convex_hull(polygon_centroid(hull), hull));
    EXPECT_GT(polygon_area(hull), 0.0);
  }
}

TEST(ConvexHullPolygon, RejectsNonConvexAndRotatesToLowest) {
  EXPECT_THROW(ConvexHullPolygon::from_vertices({{0, 0}, {0, 1}, {1, 0}}), Error);  // clockwise
  EXPECT_THROW(ConvexHullPolygon::from_vertices({{0, 0}, {1, 0}, {2, 0}, {1, 1}}), Error);
  const auto h = ConvexHullPolygon::from_vertices({{1, 1}, {0, 1}, {0, 0}, {1, 0}});
  EXPECT_EQ(h[0], (Point2{0, 0}));
}

TEST(HullsConnected, TouchingOverlappingAndApart) {
  const auto a = graham_scan(std::vector<Point2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const auto touching = graham_scan(std::vector<Point2>{{1, 0}, {2, 0}, {2, 1}, {1, 1}});
  const auto crossing = graham_scan(std::vector<Point2>{{0.5, -1}, {0.6, -1}, {0.6, 2}, {0.5, 2}});
  const auto apart = graham_scan(std::vector<Point2>{{3, 0}, {4, 0}, {4, 1}, {3, 1}});
  EXPECT_TRUE(hulls_connected(a, touching));
  EXPECT_TRUE(hulls_connected(a, crossing));
  EXPECT_FALSE(hulls_connected(a, apart));
}

TEST(HullRobustness, NearlyCollinearRunsStayCovered) {
  // Interpolated samples on long diagonal strips far from the origin: their
  // turns sit near the orientation tolerance.
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(100.0, 900.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const Point2 dir = (b - a) * (1.0 / distance(a, b));
    const Point2 n{-dir.y, dir.x};
    const double w = 1.0 + trial % 5;
    std::vector<Point2> pts;
    for (int k = 0; k <= 40; ++k) {
      const Point2 c = a + (b - a) * (k / 40.0);
      pts.push_back(c);
      pts.push_back(c + n * w);
      pts.push_back(c - n * w);
    }
    const auto g = graham_scan(pts);
    const auto c = chan_hull(pts);
    ASSERT_EQ(as_vector(c), as_vector(g)) << "trial " << trial;
    for (Point2 p : pts) {
      ASSERT_TRUE(point_in_convex_hull(p, g)) << "trial " << trial;
      ASSERT_TRUE(point_in_convex_hull(p, c)) << "trial " << trial;
    }
  }
}
