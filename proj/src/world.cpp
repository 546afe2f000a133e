#include "eaae/world.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

namespace eaae {

namespace {

using nlohmann::json;

Vec3 read_vec3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3)
    throw ScenarioError("scenario field '" + field + "': expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number())
      throw ScenarioError("scenario field '" + field + "[" + std::to_string(i) + "]': expected a number");
    v[i] = j[i].get<double>();
  }
  return v;
}

const json& require(const json& j, const char* key, const std::string& context) {
  if (!j.is_object() || !j.contains(key))
    throw ScenarioError("scenario field '" + context + key + "': missing");
  return j.at(key);
}

ObstacleBox read_box(const json& j, const std::string& context) {
  return {read_vec3(require(j, "min", context + "."), context + ".min"),
          read_vec3(require(j, "max", context + "."), context + ".max")};
}

json box_json(const ObstacleBox& b) {
  return {{"min", {b.min_corner.x(), b.min_corner.y(), b.min_corner.z()}},
          {"max", {b.max_corner.x(), b.max_corner.y(), b.max_corner.z()}}};
}

bool strictly_ordered(const ObstacleBox& b) { return (b.min_corner.array() < b.max_corner.array()).all(); }

// Entry distance of a ray into a closed box, nullopt on miss.
std::optional<double> slab_entry(const ObstacleBox& box, const Vec3& o, const Vec3& d) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < box.min_corner[a] || o[a] > box.max_corner[a]) return std::nullopt;
      continue;
    }
    double t0 = (box.min_corner[a] - o[a]) / d[a];
    double t1 = (box.max_corner[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_far < 0.0) return std::nullopt;
  return std::max(t_near, 0.0);
}

}  // namespace

void validate(const Scenario& s) {
  if (!strictly_ordered(s.bounds)) throw ScenarioError("invalid scenario: bounds.min must be < bounds.max componentwise");
  for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
    const auto& b = s.obstacles[i];
    const std::string tag = "obstacles[" + std::to_string(i) + "]";
    if (!strictly_ordered(b)) throw ScenarioError("invalid scenario: " + tag + ".min must be < max componentwise");
    const bool intersects = (b.min_corner.array() < s.bounds.max_corner.array()).all() &&
                            (b.max_corner.array() > s.bounds.min_corner.array()).all();
    if (!intersects) throw ScenarioError("invalid scenario: " + tag + " does not intersect bounds");
  }
  if (s.wall_thickness <= 0.0) throw ScenarioError("invalid scenario: wall_thickness must be positive");
  const Vec3& p = s.start.position;
  if (!((p.array() > s.bounds.min_corner.array()).all() && (p.array() < s.bounds.max_corner.array()).all()))
    throw ScenarioError("invalid scenario: start position must lie strictly inside bounds");
  for (std::size_t i = 0; i < s.obstacles.size(); ++i)
    if (s.obstacles[i].contains(p))
      throw ScenarioError("invalid scenario: start position lies inside obstacles[" + std::to_string(i) + "]");
}

Scenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }
  if (!j.is_object()) throw ScenarioError("scenario parse error: top level must be an object");

  Scenario s;
  const auto& name = require(j, "name", "");
  if (!name.is_string()) throw ScenarioError("scenario field 'name': expected a string");
  s.name = name.get<std::string>();
  s.bounds = read_box(require(j, "bounds", ""), "bounds");
  if (j.contains("wall_thickness")) {
    if (!j["wall_thickness"].is_number()) throw ScenarioError("scenario field 'wall_thickness': expected a number");
    s.wall_thickness = j["wall_thickness"].get<double>();
  }
  if (j.contains("obstacles")) {
    const auto& obs = j["obstacles"];
    if (!obs.is_array()) throw ScenarioError("scenario field 'obstacles': expected an array");
    for (std::size_t i = 0; i < obs.size(); ++i)
      s.obstacles.push_back(read_box(obs[i], "obstacles[" + std::to_string(i) + "]"));
  }
  const auto& start = require(j, "start", "");
  s.start.position = read_vec3(require(start, "position", "start."), "start.position");
  if (start.contains("yaw")) {
    if (!start["yaw"].is_number()) throw ScenarioError("scenario field 'start.yaw': expected a number");
    s.start.yaw = start["yaw"].get<double>();
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

std::string dump_scenario(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["bounds"] = box_json(s.bounds);
  j["wall_thickness"] = s.wall_thickness;
  j["obstacles"] = json::array();
  for (const auto& b : s.obstacles) j["obstacles"].push_back(box_json(b));
  j["start"] = {{"position", {s.start.position.x(), s.start.position.y(), s.start.position.z()}},
                {"yaw", s.start.yaw}};
  return j.dump(2) + "\n";
}

Scenario builtin_scenario(std::string_view name) {
  Scenario s;
  s.start.position = Vec3(0.0, 0.0, 1.0);
  s.start.yaw = 0.0;
  s.wall_thickness = 0.2;
  if (name == "simple") {
    s.name = "simple";
    s.bounds = {Vec3(-10.0, -10.0, 0.0), Vec3(10.0, 10.0, 2.5)};
  } else if (name == "pillars") {
    s.name = "pillars";
    s.bounds = {Vec3(-11.0, -11.0, 0.0), Vec3(11.0, 11.0, 2.5)};
    // 3x3 grid, 6 m pitch, shifted half a pitch so the start pose sits
    // between pillars.
    constexpr double half = 0.3;
    for (double cx : {-3.0, 3.0, 9.0})
      for (double cy : {-3.0, 3.0, 9.0})
        s.obstacles.push_back({Vec3(cx - half, cy - half, 0.0), Vec3(cx + half, cy + half, 2.5)});
  } else {
    throw ScenarioError("unknown built-in scenario: " + std::string(name));
  }
  validate(s);
  return s;
}

std::vector<std::string> builtin_scenario_names() { return {"simple", "pillars"}; }

Scenario resolve_scenario(std::string_view name_or_path) {
  for (const auto& n : builtin_scenario_names())
    if (n == name_or_path) return builtin_scenario(n);
  return load_scenario(std::filesystem::path(name_or_path));
}

std::optional<double> raycast(const Scenario& s, const Vec3& origin, const Vec3& direction, double max_range) {
  if (point_in_obstacle(s, origin)) return 0.0;

  // Origin is strictly inside the room: exit through the nearest wall.
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (direction[a] > 0.0)
      best = std::min(best, (s.bounds.max_corner[a] - origin[a]) / direction[a]);
    else if (direction[a] < 0.0)
      best = std::min(best, (s.bounds.min_corner[a] - origin[a]) / direction[a]);
  }
  for (const auto& box : s.obstacles) {
    if (auto t = slab_entry(box, origin, direction); t && *t < best) best = *t;
  }
  if (best <= max_range) return best;
  return std::nullopt;
}

bool point_in_obstacle(const Scenario& s, const Vec3& p) {
  if (!((p.array() > s.bounds.min_corner.array()).all() && (p.array() < s.bounds.max_corner.array()).all()))
    return true;
  return std::any_of(s.obstacles.begin(), s.obstacles.end(), [&](const ObstacleBox& b) { return b.contains(p); });
}

double clearance_at(const Scenario& s, const Vec3& p) {
  if (point_in_obstacle(s, p)) return 0.0;
  double best = std::min((p - s.bounds.min_corner).minCoeff(), (s.bounds.max_corner - p).minCoeff());
  for (const auto& b : s.obstacles) {
    const Vec3 outside = (b.min_corner - p).cwiseMax(p - b.max_corner).cwiseMax(0.0);
    best = std::min(best, outside.norm());
  }
  return best;
}

}  // namespace eaae
