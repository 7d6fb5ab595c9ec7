#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "secnav/metrics.hpp"
#include "secnav/navigator.hpp"
#include "secnav/scenario.hpp"

using namespace secnav;

namespace {

BattlefieldMap line_map() {
  // Three clusters on y = 100, landmarks above and below the line.
  BattlefieldMap map;
  int id = 0;
  for (int c = 0; c < 3; ++c) {
    const double x = 30.0 + 60.0 * c;
    for (Point2 d : {Point2{-8, -12}, Point2{8, -12}, Point2{0, 24}}) {
      map.landmarks.push_back({id++, {x + d.x, 100 + d.y}, c});
    }
  }
  return map;
}

PreparedPath prepared(const BattlefieldMap& map, std::vector<int> seq, double margin = 5.0) {
  Scenario sc;
  sc.map = map;
  PathSpec spec{1, std::move(seq), margin, 20.0};
  return prepare_path(sc, spec);
}

NavigationSettings noiseless(const BattlefieldMap& map, const PreparedPath& path) {
  NavigationSettings st;
  st.noise.process = ProcessNoise::none();
  st.noise.measurement = MeasurementNoise::none();
  st.filter = calibrated_filter(map, path.truth, st.noise, st.nav.desired_speed, 1);
  return st;
}

double centroid_polyline_length(const PreparedPath& path) {
  std::vector<Point2> pts{path.truth.polyline.front()};
  pts.insert(pts.end(), path.corridor.centroids.begin(), path.corridor.centroids.end());
  pts.push_back(path.truth.polyline.back());
  return polyline_length(pts);
}

double true_length(const NavigationOutcome& out) {
  double len = 0;
  for (std::size_t i = 1; i < out.truth.size(); ++i) len += distance(out.truth[i - 1].state.position, out.truth[i].state.position);
  return len;
}

void expect_run_invariants(const NavigationOutcome& out, const PreparedPath& path, const MotionParams& mp) {
  ASSERT_EQ(out.decisions.size(), out.steps());
  ASSERT_EQ(out.segment_log.size(), out.steps());
  ASSERT_EQ(out.trajectory.size(), out.steps() + 1);
  ASSERT_EQ(out.truth.size(), out.steps() + 1);
  for (std::size_t k = 0; k < out.steps(); ++k) {
    const Point2 predicted = out.trajectory[k + 1].state.position;
    const auto& hulls = path.corridor.hulls;
    const std::size_t seg = out.segment_log[k];
    switch (out.decisions[k]) {
      case SafetyDecision::MoveAhead: EXPECT_TRUE(point_in_convex_hull(predicted, hulls[seg])) << k; break;
      case SafetyDecision::AdvanceSegment:
        EXPECT_FALSE(point_in_convex_hull(predicted, hulls[seg])) << k;
        ASSERT_LT(seg + 1, hulls.size());
        EXPECT_TRUE(point_in_convex_hull(predicted, hulls[seg + 1])) << k;
        break;
      case SafetyDecision::Reroute: break;
    }
    if (k > 0) {
      EXPECT_GE(seg, out.segment_log[k - 1]);
    }
    EXPECT_LE(std::abs(out.control_log[k].heading_change), mp.maneuverability * mp.dt + 1e-15);
    EXPECT_GT(out.truth[k + 1].t, out.truth[k].t);
  }
}

}  // namespace

TEST(SafetyCheck, Decisions) {
  const auto map = line_map();
  const auto path = prepared(map, {0, 1, 2});
  const auto& c = path.corridor;
  ASSERT_GE(c.size(), 3u);
  EXPECT_EQ(safety_check(c.centroids[0], c, 0), SafetyDecision::MoveAhead);
  EXPECT_EQ(safety_check(c.centroids[2], c, 1), SafetyDecision::AdvanceSegment);
  EXPECT_EQ(safety_check({500, 500}, c, 0), SafetyDecision::Reroute);
  EXPECT_EQ(safety_check(c.centroids.back() + Point2{0, 50}, c, c.size() - 1), SafetyDecision::Reroute);
  EXPECT_THROW(safety_check(c.centroids[0], c, c.size()), Error);
}

TEST(Navigate, StartOutsideFirstHullRejected) {
  const auto map = line_map();
  auto path = prepared(map, {0, 1, 2});
  path.truth.polyline.front() = {30, 180};
  try {
    navigate(path, map, Approach::BmmEkfLanBLoc, noiseless(map, path), 1);
    FAIL() << "expected InvalidArgument";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Navigate, ZeroSpeedRejected) {
  const auto map = line_map();
  const auto path = prepared(map, {0, 1, 2});
  auto st = noiseless(map, path);
  st.nav.desired_speed = 0;
  EXPECT_THROW(navigate(path, map, Approach::BmmLanBLoc, st, 1), Error);
}

TEST(Navigate, NoiselessStraightCorridor) {
  const auto map = line_map();
  const auto path = prepared(map, {0, 1, 2});
  const auto st = noiseless(map, path);
  for (Approach a : {Approach::BmmLanBLoc, Approach::BmmEkfLanBLoc}) {
    const NavigationOutcome out = navigate(path, map, a, st, 3);
    EXPECT_TRUE(out.reached_goal);
    EXPECT_FALSE(out.step_cap_exceeded);
    EXPECT_EQ(out.safety_violations, 0);
    EXPECT_EQ(out.reroutes, 0);
    EXPECT_NEAR(true_length(out), centroid_polyline_length(path), 0.01 * centroid_polyline_length(path));
    EXPECT_LE(distance(out.estimates.back().state.position, path.truth.polyline.back()), st.nav.goal_threshold);
    expect_run_invariants(out, path, st.motion);
  }
}

TEST(Navigate, NoiselessBuiltInPaths) {
  const Scenario sc = generate_scenario({});
  for (const PathSpec& spec : sc.paths) {
    const PreparedPath path = prepare_path(sc, spec);
    const auto st = noiseless(sc.map, path);
    for (Approach a : {Approach::BmmLanBLoc, Approach::BmmEkfLanBLoc}) {
      const NavigationOutcome out = navigate(path, sc.map, a, st, 1);
      EXPECT_TRUE(out.reached_goal);
      EXPECT_EQ(out.safety_violations, 0);
      const double want = centroid_polyline_length(path);
      EXPECT_LT(std::abs(true_length(out) - want), 0.01 * want);
      expect_run_invariants(out, path, st.motion);
    }
  }
}

TEST(Navigate, NoisyRunsKeepInvariantsAndRepeat) {
  const Scenario sc = generate_scenario({});
  const PreparedPath path = prepare_path(sc, sc.paths[7]);
  NavigationSettings st;
  st.noise = sc.noise;
  st.filter = calibrated_filter(sc.map, path.truth, sc.noise, st.nav.desired_speed, 1);
  for (Approach a : {Approach::BmmLanBLoc, Approach::BmmEkfLanBLoc}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const NavigationOutcome out = navigate(path, sc.map, a, st, seed);
      expect_run_invariants(out, path, st.motion);
      if (out.reached_goal) {
        EXPECT_LE(distance(out.estimates.back().state.position, path.truth.polyline.back()), st.nav.goal_threshold);
      }
      const NavigationOutcome again = navigate(path, sc.map, a, st, seed);
      ASSERT_EQ(again.steps(), out.steps());
      EXPECT_EQ(again.truth.back().state, out.truth.back().state);
    }
  }
}

TEST(Navigate, StepCapReportedNotThrown) {
  const auto map = line_map();
  const auto path = prepared(map, {0, 1, 2});
  auto st = noiseless(map, path);
  st.nav.step_cap_factor = 0.1;
  const NavigationOutcome out = navigate(path, map, Approach::BmmEkfLanBLoc, st, 1);
  EXPECT_TRUE(out.step_cap_exceeded);
  EXPECT_FALSE(out.reached_goal);
}

TEST(Navigate, EkfBeatsRawFixesUnderNoise) {
  const Scenario sc = generate_scenario({});
  NavigationSettings st;
  st.noise = sc.noise;
  double pe[2] = {0, 0};
  int runs = 0;
  for (std::size_t p = 0; p < sc.paths.size(); p += 4) {
    const PreparedPath path = prepare_path(sc, sc.paths[p]);
    st.filter = calibrated_filter(sc.map, path.truth, sc.noise, st.nav.desired_speed, p + 1);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (int a = 0; a < 2; ++a) {
        const auto out = navigate(path, sc.map, a == 0 ? Approach::BmmLanBLoc : Approach::BmmEkfLanBLoc, st, seed);
        Trajectory est;
        for (const auto& s : out.trajectory) est.push_back({s.t, s.state.position});
        pe[a] += evaluate_trajectory(est, path.truth.polyline).percent_error;
      }
      ++runs;
    }
  }
  EXPECT_LT(pe[1] / runs, pe[0] / runs);
}
