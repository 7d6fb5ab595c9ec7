#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "secnav/corridor.hpp"
#include "secnav/error.hpp"
#include "secnav/geometry.hpp"
#include "secnav/localization.hpp"
#include "secnav/motion.hpp"

namespace secnav {

inline constexpr int kScenarioVersion = 1;
inline constexpr double kDefaultMargin = 5.0;
inline constexpr double kDefaultSegmentLength = 20.0;
inline constexpr double kDefaultSampleSpacing = 1.0;

struct BattlefieldMap {
  double width{200.0};
  double height{200.0};
  std::vector<Landmark> landmarks;
  /// Hazard outlines; annotation only, never consulted by the navigator.
  std::vector<std::vector<Point2>> obstacles;

  friend bool operator==(const BattlefieldMap&, const BattlefieldMap&) = default;

  bool in_bounds(Point2 p) const { return p.x >= 0 && p.x <= width && p.y >= 0 && p.y <= height; }

  int cluster_count() const {
    int n = 0;
    for (const Landmark& lm : landmarks) n = std::max(n, lm.cluster_id + 1);
    return n;
  }

  void validate() const {
    if (!(width > 0 && height > 0) || !std::isfinite(width) || !std::isfinite(height)) {
      throw Error(ErrorCode::InvalidArgument, "map size must be positive");
    }
    std::vector<int> ids;
    std::vector<bool> seen(static_cast<std::size_t>(cluster_count()), false);
    for (const Landmark& lm : landmarks) {
      if (!is_finite(lm.position) || !in_bounds(lm.position)) {
        throw Error(ErrorCode::InvalidArgument, "landmark " + std::to_string(lm.id) + " is outside the map");
      }
      if (lm.cluster_id < 0) throw Error(ErrorCode::InvalidArgument, "negative cluster id");
      seen[static_cast<std::size_t>(lm.cluster_id)] = true;
      ids.push_back(lm.id);
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw Error(ErrorCode::InvalidArgument, "cluster ids must be contiguous from 0");
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw Error(ErrorCode::InvalidArgument, "landmark ids must be unique");
    }
  }
};

/// Mean position of a cluster's landmarks.
inline Point2 cluster_centroid(const BattlefieldMap& map, int cluster) {
  Point2 sum{};
  int n = 0;
  for (const Landmark& lm : map.landmarks) {
    if (lm.cluster_id == cluster) {
      sum = sum + lm.position;
      ++n;
    }
  }
  if (n < 3) {
    throw Error(ErrorCode::EmptyCluster,
                "cluster " + std::to_string(cluster) + " has " + std::to_string(n) + " landmark(s), need 3");
  }
  return sum * (1.0 / n);
}

struct GroundTruthTrajectory {
  std::vector<Point2> waypoints;
  std::vector<Point2> polyline;
  double length{0.0};
};

inline double polyline_length(std::span<const Point2> pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

/// Piecewise-linear path through the centroids of `cluster_sequence`, each
/// leg split evenly into pieces no longer than `sample_spacing`.
inline GroundTruthTrajectory generate_ground_truth(const BattlefieldMap& map,
                                                   std::span<const int> cluster_sequence,
                                                   double sample_spacing = kDefaultSampleSpacing) {
  if (cluster_sequence.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "ground truth needs at least 2 clusters");
  }
  if (!(sample_spacing > 0)) throw Error(ErrorCode::InvalidArgument, "sample spacing must be positive");
  GroundTruthTrajectory truth;
  for (int c : cluster_sequence) truth.waypoints.push_back(cluster_centroid(map, c));

  truth.polyline.push_back(truth.waypoints.front());
  for (std::size_t w = 1; w < truth.waypoints.size(); ++w) {
    const Point2 a = truth.waypoints[w - 1];
    const Point2 b = truth.waypoints[w];
    const double leg = distance(a, b);
    if (leg == 0.0) continue;
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(leg / sample_spacing - 1e-9)));
    for (std::size_t k = 1; k < pieces; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(pieces);
      truth.polyline.push_back(a + (b - a) * t);
    }
    truth.polyline.push_back(b);
  }
  truth.length = polyline_length(truth.polyline);
  return truth;
}

/// Splits the truth polyline into stretches of about `segment_len` metres.
/// Each stretch's point set is its samples plus lateral offsets at +/-margin
/// for every direction meeting at a sample; neighbouring stretches share the
/// sample where they meet. The two ends are capped by a margin-sized square so
/// the start and goal sit inside their hulls with room to stop.
inline SafeCorridor build_safe_corridor(const GroundTruthTrajectory& truth, double margin = kDefaultMargin,
                                        double segment_len = kDefaultSegmentLength) {
  if (!(margin > 0)) throw Error(ErrorCode::InvalidArgument, "corridor margin must be positive");
  if (!(segment_len > 0)) throw Error(ErrorCode::InvalidArgument, "segment length must be positive");
  const auto& pts = truth.polyline;
  if (pts.size() < 2) throw Error(ErrorCode::InvalidArgument, "truth polyline too short");

  // Split indices: [breaks[i], breaks[i+1]] is stretch i.
  std::vector<std::size_t> breaks{0};
  double acc = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    acc += distance(pts[i - 1], pts[i]);
    if (acc >= segment_len - 1e-9 && i + 1 < pts.size()) {
      breaks.push_back(i);
      acc = 0.0;
    }
  }
  // A short tail joins the previous stretch.
  if (breaks.size() > 1 && acc < 0.5 * segment_len) breaks.pop_back();
  breaks.push_back(pts.size() - 1);

  auto offsets_at = [&](std::size_t i, std::vector<Point2>& out) {
    auto add_for = [&](Point2 dir) {
      const double len = norm(dir);
      if (len == 0.0) return;
      const Point2 normal{-dir.y / len, dir.x / len};
      out.push_back(pts[i] + normal * margin);
      out.push_back(pts[i] - normal * margin);
    };
    const bool has_in = i > 0;
    const bool has_out = i + 1 < pts.size();
    if (has_in) add_for(pts[i] - pts[i - 1]);
    // On a straight stretch the outgoing offsets repeat the incoming ones.
    if (has_out && !(has_in && turn(pts[i - 1], pts[i], pts[i + 1]) == Turn::Straight)) {
      add_for(pts[i + 1] - pts[i]);
    }
    if (!has_in || !has_out) {
      const Point2 dir = has_out ? pts[i] - pts[i + 1] : pts[i] - pts[i - 1];
      const Point2 t = dir * (1.0 / norm(dir));
      const Point2 n{-t.y, t.x};
      out.push_back(pts[i] + (t + n) * margin);
      out.push_back(pts[i] + (t - n) * margin);
    }
  };

  std::vector<PathSegment> segments;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    PathSegment seg;
    seg.sequence_index = s;
    for (std::size_t i = breaks[s]; i <= breaks[s + 1]; ++i) {
      seg.points.push_back(pts[i]);
      offsets_at(i, seg.points);
    }
    segments.push_back(std::move(seg));
  }
  return SafeCorridor::from_segments(std::move(segments));
}

/// One safe path of the scenario file.
struct PathSpec {
  int path_class{0};
  std::vector<int> cluster_sequence;
  double margin{kDefaultMargin};
  double segment_len{kDefaultSegmentLength};

  friend bool operator==(const PathSpec&, const PathSpec&) = default;
};

/// Noise settings shipped with a scenario.
struct NoiseConfig {
  ProcessNoise process;
  MeasurementNoise measurement;
  double detect_range{kDefaultDetectRange};

  friend bool operator==(const NoiseConfig& a, const NoiseConfig& b) {
    return a.process.sigma_x == b.process.sigma_x && a.process.sigma_y == b.process.sigma_y &&
           a.process.sigma_theta == b.process.sigma_theta && a.process.sigma_v == b.process.sigma_v &&
           a.measurement.sigma_range == b.measurement.sigma_range &&
           a.measurement.sigma_speed == b.measurement.sigma_speed && a.detect_range == b.detect_range;
  }
};

struct Scenario {
  int version{kScenarioVersion};
  BattlefieldMap map;
  std::vector<PathSpec> paths;
  NoiseConfig noise;
  double sample_spacing{kDefaultSampleSpacing};

  friend bool operator==(const Scenario&, const Scenario&) = default;

  void validate() const {
    map.validate();
    if (!(sample_spacing > 0)) throw Error(ErrorCode::InvalidArgument, "sample spacing must be positive");
    noise.process.validate();
    noise.measurement.validate();
    if (!(noise.detect_range > 0)) throw Error(ErrorCode::InvalidArgument, "detect range must be positive");
    const int clusters = map.cluster_count();
    for (const PathSpec& p : paths) {
      if (p.cluster_sequence.size() < 2) throw Error(ErrorCode::InvalidArgument, "path needs >= 2 clusters");
      for (int c : p.cluster_sequence) {
        if (c < 0 || c >= clusters) {
          throw Error(ErrorCode::InvalidArgument, "path references unknown cluster " + std::to_string(c));
        }
      }
      if (!(p.margin > 0) || !(p.segment_len > 0)) {
        throw Error(ErrorCode::InvalidArgument, "path margin and segment length must be positive");
      }
    }
  }
};

/// Paths sharing a class id.
struct PathClass {
  int id{0};
  std::vector<std::size_t> member_paths;  // indices into Scenario::paths
};

inline std::vector<PathClass> path_classes(const Scenario& scenario) {
  std::map<int, PathClass> by_id;
  for (std::size_t i = 0; i < scenario.paths.size(); ++i) {
    PathClass& pc = by_id[scenario.paths[i].path_class];
    pc.id = scenario.paths[i].path_class;
    pc.member_paths.push_back(i);
  }
  std::vector<PathClass> out;
  for (auto& [id, pc] : by_id) out.push_back(std::move(pc));
  return out;
}

/// A path with its truth and corridor materialised.
struct PreparedPath {
  PathSpec spec;
  GroundTruthTrajectory truth;
  SafeCorridor corridor;
};

inline PreparedPath prepare_path(const Scenario& scenario, const PathSpec& spec) {
  PreparedPath p;
  p.spec = spec;
  p.truth = generate_ground_truth(scenario.map, spec.cluster_sequence, scenario.sample_spacing);
  p.corridor = build_safe_corridor(p.truth, spec.margin, spec.segment_len);
  return p;
}

/// Battlefield-grade noise for the navigation experiments: ranging error of
/// a stereo rig at tens of metres, not the bench figure behind
/// MeasurementNoise's defaults.
inline NoiseConfig field_noise() {
  NoiseConfig n;
  n.process = {0.1, 0.1, 0.02, 0.1};
  n.measurement = {0.5, 0.3};
  n.detect_range = kDefaultDetectRange;
  return n;
}

struct GenerateOptions {
  double width{200.0};
  double height{200.0};
  std::uint64_t seed{1};
  double margin{kDefaultMargin};
  double segment_len{kDefaultSegmentLength};
  NoiseConfig noise{field_noise()};
};

/// Built-in battlefield: a 4x4 lattice of landmark clusters scaled to the
/// map, with three path classes of 6, 5 and 6 paths.
inline Scenario generate_scenario(const GenerateOptions& opts) {
  if (!(opts.width > 0 && opts.height > 0) || !std::isfinite(opts.width) || !std::isfinite(opts.height)) {
    throw Error(ErrorCode::InvalidArgument, "map size must be positive");
  }
  Scenario sc;
  sc.map.width = opts.width;
  sc.map.height = opts.height;
  sc.noise = opts.noise;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kGrid = 4;
  const double cell_w = opts.width / kGrid;
  const double cell_h = opts.height / kGrid;
  const double jitter = 0.12 * std::min(cell_w, cell_h);
  const double spread = 0.16 * std::min(cell_w, cell_h);

  int next_id = 0;
  for (int row = 0; row < kGrid; ++row) {
    for (int col = 0; col < kGrid; ++col) {
      const int cluster = row * kGrid + col;
      const Point2 center{(col + 0.5) * cell_w + jitter * (2 * unit(rng) - 1),
                          (row + 0.5) * cell_h + jitter * (2 * unit(rng) - 1)};
      const int members = 4 + static_cast<int>(unit(rng) * 3);  // 4..6
      const double phase = 2 * std::numbers::pi * unit(rng);
      for (int k = 0; k < members; ++k) {
        const double ang = phase + 2 * std::numbers::pi * k / members + 0.3 * (unit(rng) - 0.5);
        const double rad = spread * (0.6 + 0.4 * unit(rng));
        Point2 p{center.x + rad * std::cos(ang), center.y + rad * std::sin(ang)};
        p.x = std::clamp(p.x, 0.0, opts.width);
        p.y = std::clamp(p.y, 0.0, opts.height);
        sc.map.landmarks.push_back({next_id++, p, cluster});
      }
    }
  }

  // Annotation-only hazards in the lattice gaps.
  for (int k = 0; k < 3; ++k) {
    const Point2 c{(1.0 + k) * cell_w, (1.0 + ((k + 1) % 3)) * cell_h};
    const double r = 0.1 * std::min(cell_w, cell_h);
    sc.map.obstacles.push_back({{c.x - r, c.y - r}, {c.x + r, c.y - r}, {c.x + r, c.y + r}, {c.x - r, c.y + r}});
  }

  auto id = [](int row, int col) { return row * kGrid + col; };
  const std::vector<std::vector<int>> class1 = {
      {id(0, 0), id(0, 1), id(0, 2), id(0, 3)},
      {id(0, 0), id(0, 1), id(1, 2), id(1, 3)},
      {id(1, 0), id(1, 1), id(1, 2), id(1, 3)},
      {id(1, 0), id(0, 1), id(0, 2), id(1, 3)},
      {id(0, 0), id(1, 1), id(1, 2), id(0, 3)},
      {id(1, 0), id(1, 1), id(0, 2)},
  };
  const std::vector<std::vector<int>> class2 = {
      {id(0, 0), id(1, 0), id(2, 0), id(3, 0)},
      {id(0, 1), id(1, 1), id(2, 1), id(3, 1)},
      {id(0, 0), id(1, 1), id(2, 1), id(3, 2)},
      {id(0, 1), id(1, 0), id(2, 0), id(3, 1)},
      {id(0, 2), id(1, 1), id(2, 1)},
  };
  const std::vector<std::vector<int>> class3 = {
      {id(0, 0), id(1, 1), id(2, 2), id(3, 3)},
      {id(3, 0), id(2, 1), id(1, 2), id(0, 3)},
      {id(2, 0), id(2, 1), id(3, 2), id(3, 3)},
      {id(3, 0), id(3, 1), id(2, 2), id(2, 3), id(1, 3)},
      {id(2, 0), id(3, 1), id(3, 2), id(2, 3)},
      {id(1, 0), id(2, 1), id(2, 2), id(3, 3)},
  };
  int cls = 1;
  for (const auto* group : {&class1, &class2, &class3}) {
    for (const auto& seq : *group) sc.paths.push_back({cls, seq, opts.margin, opts.segment_len});
    ++cls;
  }
  sc.validate();
  return sc;
}

}  // namespace secnav
