#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "secnav/error.hpp"
#include "secnav/scenario.hpp"

namespace secnav {

namespace detail {

using nlohmann::json;

// Walks a parsed document, naming the offending field on failure.
class FieldReader {
 public:
  FieldReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  FieldReader at(std::string_view key) const {
    if (!node_.is_object()) fail("expected an object");
    const auto it = node_.find(key);
    if (it == node_.end()) {
      throw Error(ErrorCode::ParseError, "field " + child(key) + ": missing");
    }
    return {*it, child(key)};
  }

  bool has(std::string_view key) const { return node_.is_object() && node_.contains(key); }

  FieldReader at(std::size_t i) const { return {node_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::size_t array_size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    return node_.get<double>();
  }

  int integer() const {
    if (!node_.is_number_integer()) fail("expected an integer");
    return node_.get<int>();
  }

  [[noreturn]] void fail(std::string_view what) const {
    throw Error(ErrorCode::ParseError, "field " + (path_.empty() ? std::string("<root>") : path_) + ": " +
                                           std::string(what));
  }

 private:
  std::string child(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json& node_;
  std::string path_;
};

inline std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline json point_json(Point2 p) { return json::array({p.x, p.y}); }

inline Point2 read_point(const FieldReader& r) {
  if (r.array_size() != 2) r.fail("expected [x, y]");
  return {r.at(std::size_t{0}).number(), r.at(std::size_t{1}).number()};
}

}  // namespace detail

/// Serialises a scenario. Doubles are written with round-trip precision, so
/// loading the text back reproduces every value bit for bit.
inline std::string scenario_to_json(const Scenario& sc) {
  using detail::json;
  json doc;
  doc["version"] = sc.version;
  doc["map"] = {{"width", sc.map.width}, {"height", sc.map.height}};
  doc["sample_spacing"] = sc.sample_spacing;

  json landmarks = json::array();
  for (const Landmark& lm : sc.map.landmarks) {
    landmarks.push_back({{"id", lm.id}, {"x", lm.position.x}, {"y", lm.position.y}, {"cluster", lm.cluster_id}});
  }
  doc["landmarks"] = std::move(landmarks);

  json obstacles = json::array();
  for (const auto& poly : sc.map.obstacles) {
    json ring = json::array();
    for (Point2 p : poly) ring.push_back(detail::point_json(p));
    obstacles.push_back(std::move(ring));
  }
  doc["obstacles"] = std::move(obstacles);

  json paths = json::array();
  for (const PathSpec& p : sc.paths) {
    paths.push_back({{"class", p.path_class},
                     {"cluster_sequence", p.cluster_sequence},
                     {"margin", p.margin},
                     {"segment_len", p.segment_len}});
  }
  doc["paths"] = std::move(paths);

  const ProcessNoise& pn = sc.noise.process;
  doc["noise"] = {
      {"process", {{"sigma_x", pn.sigma_x}, {"sigma_y", pn.sigma_y}, {"sigma_theta", pn.sigma_theta}, {"sigma_v", pn.sigma_v}}},
      {"measurement",
       {{"sigma_range", sc.noise.measurement.sigma_range}, {"sigma_speed", sc.noise.measurement.sigma_speed}}},
      {"detect_range", sc.noise.detect_range}};
  return doc.dump(2) + "\n";
}

/// Parses and validates a scenario document. Syntax errors report line and
/// column, schema errors the dotted field path.
inline Scenario scenario_from_json(std::string_view text) {
  using detail::FieldReader;
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1) + ": malformed document");
  }
  const FieldReader root(doc, "");

  Scenario sc;
  sc.version = root.at("version").integer();
  if (sc.version != kScenarioVersion) {
    throw Error(ErrorCode::VersionMismatch, "scenario version " + std::to_string(sc.version) + ", expected " +
                                                std::to_string(kScenarioVersion));
  }

  const FieldReader map = root.at("map");
  sc.map.width = map.at("width").number();
  sc.map.height = map.at("height").number();
  if (root.has("sample_spacing")) sc.sample_spacing = root.at("sample_spacing").number();

  const FieldReader lms = root.at("landmarks");
  for (std::size_t i = 0, n = lms.array_size(); i < n; ++i) {
    const FieldReader lm = lms.at(i);
    sc.map.landmarks.push_back(
        {lm.at("id").integer(), {lm.at("x").number(), lm.at("y").number()}, lm.at("cluster").integer()});
  }

  if (root.has("obstacles")) {
    const FieldReader obs = root.at("obstacles");
    for (std::size_t i = 0, n = obs.array_size(); i < n; ++i) {
      const FieldReader ring = obs.at(i);
      std::vector<Point2> poly;
      for (std::size_t j = 0, m = ring.array_size(); j < m; ++j) poly.push_back(detail::read_point(ring.at(j)));
      sc.map.obstacles.push_back(std::move(poly));
    }
  }

  const FieldReader paths = root.at("paths");
  for (std::size_t i = 0, n = paths.array_size(); i < n; ++i) {
    const FieldReader p = paths.at(i);
    PathSpec spec;
    spec.path_class = p.at("class").integer();
    const FieldReader seq = p.at("cluster_sequence");
    for (std::size_t j = 0, m = seq.array_size(); j < m; ++j) spec.cluster_sequence.push_back(seq.at(j).integer());
    if (p.has("margin")) spec.margin = p.at("margin").number();
    if (p.has("segment_len")) spec.segment_len = p.at("segment_len").number();
    sc.paths.push_back(std::move(spec));
  }

  if (root.has("noise")) {
    const FieldReader noise = root.at("noise");
    if (noise.has("process")) {
      const FieldReader pn = noise.at("process");
      sc.noise.process = {pn.at("sigma_x").number(), pn.at("sigma_y").number(), pn.at("sigma_theta").number(),
                          pn.at("sigma_v").number()};
    }
    if (noise.has("measurement")) {
      const FieldReader mn = noise.at("measurement");
      sc.noise.measurement = {mn.at("sigma_range").number(), mn.at("sigma_speed").number()};
    }
    if (noise.has("detect_range")) sc.noise.detect_range = noise.at("detect_range").number();
  }

  try {
    sc.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid scenario: ") + e.what());
  }
  return sc;
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  out << scenario_to_json(sc);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return scenario_from_json(buf.str());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw Error(ErrorCode::ParseError, path + ": " + e.detail());
    throw;
  }
}

}  // namespace secnav
