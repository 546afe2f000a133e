#pragma once

#include "eaae/common.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eaae {

/// Axis-aligned box. Treated as closed: points on a face are inside.
struct ObstacleBox {
  Vec3 min_corner;
  Vec3 max_corner;

  bool contains(const Vec3& p) const {
    return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
  }
  Vec3 center() const { return 0.5 * (min_corner + max_corner); }
};

struct Pose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

/// Ground-truth environment: a closed room (the boundary is wall) with
/// axis-aligned box obstacles.
struct Scenario {
  std::string name;
  ObstacleBox bounds;
  std::vector<ObstacleBox> obstacles;
  double wall_thickness = 0.2;
  Pose start;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ScenarioError naming the violated invariant.
void validate(const Scenario& scenario);

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const Scenario& scenario);

/// Built-ins: "simple" (open 20x20x2.5 m room) and "pillars" (22x22x2.5 m,
/// 3x3 grid of 0.6 m pillars at 6 m pitch).
Scenario builtin_scenario(std::string_view name);
std::vector<std::string> builtin_scenario_names();

/// Resolves a built-in name or a scenario file path.
Scenario resolve_scenario(std::string_view name_or_path);

/// Smallest nonnegative distance at which the ray enters an obstacle or the
/// room boundary, or nullopt when nothing is hit within max_range.
std::optional<double> raycast(const Scenario& scenario, const Vec3& origin, const Vec3& direction,
                              double max_range);

/// True iff p is inside (or on) any obstacle, or on/outside the room boundary.
bool point_in_obstacle(const Scenario& scenario, const Vec3& p);

/// Euclidean distance from p to the nearest obstacle or wall surface
/// (zero when p is in an obstacle).
double clearance_at(const Scenario& scenario, const Vec3& p);

}  // namespace eaae
