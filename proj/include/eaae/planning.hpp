#pragma once

#include "eaae/mapping.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eaae {

struct PathPolyline {
  std::vector<Vec3> waypoints;

  double length() const;
};

struct TrajectorySample {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  /// Set by TimedTrajectory::at from the interpolated acceleration.
  Vec3 jerk = Vec3::Zero();
  double yaw = 0.0;
  double yaw_rate = 0.0;
};

/// Uniformly sampled reference motion, starting at t = 0.
struct TimedTrajectory {
  double dt = 0.02;
  std::vector<TrajectorySample> samples;

  bool empty() const { return samples.empty(); }
  double duration() const { return samples.empty() ? 0.0 : samples.back().t; }
  /// Linear interpolation between samples; holds the end sample past the
  /// last time.
  TrajectorySample at(double t) const;
};

struct MotionLimits {
  double v_max = 5.0;
  double a_max = 4.0;
  double yaw_rate_max = 1.5;
  /// Upper bound on the distance from a polyline corner to where its
  /// rounding arc starts.
  double corner_round = 0.5;
};

struct PlannerConfig {
  double clearance = 0.4;            // inflation radius for path search
  double collision_clearance = 0.3;  // execution-time check
  double d_grace = 0.3;              // unknown space tolerated near the goal
  double dt = 0.02;
  MotionLimits limits;
};

/// Voxels the path search may enter: known free and not within `clearance`
/// of an occupied voxel.
bool traversable(const VoxelMap& map, const VoxelKey& key, double clearance);

/// Every voxel pierced by the segment is traversable (the voxel containing
/// `from` is exempt).
bool line_of_sight(const VoxelMap& map, const Vec3& from, const Vec3& to, double clearance);

/// 26-connected A* over traversable voxels with a Euclidean heuristic,
/// followed by greedy line-of-sight shortcutting. Free voxels within
/// `clearance` of the start are admitted so a vehicle already close to an
/// obstacle can leave.
Expected<PathPolyline> plan_path(const VoxelMap& map, const Vec3& start, const Vec3& goal, double clearance);

/// Trapezoidal arc-length profile over the polyline with circular corner
/// rounding (arc speed <= sqrt(a_max * R)); yaw moves along the shortest
/// angular way at a constant rate spread over the whole motion, capped by
/// yaw_rate_max. Rest to rest.
TimedTrajectory time_parameterize(const PathPolyline& path, double start_yaw, double goal_yaw,
                                  const MotionLimits& limits, double dt);

struct CollisionCheck {
  double clearance = 0.3;
  double d_grace = 0.3;
  /// Samples within this distance of the first sample skip the clearance
  /// test (occupied voxels still count).
  double start_grace = 0.0;
};

/// Earliest sample time within clearance of an occupied voxel, inside an
/// occupied voxel, outside the workspace, or inside an unknown voxel farther
/// than d_grace from the trajectory end.
std::optional<double> first_collision(const TimedTrajectory& trajectory, const VoxelMap& map,
                                      const CollisionCheck& check, std::size_t from_index = 0);

/// plan_path + time_parameterize, shrinking corner rounding until the
/// sampled reference passes first_collision at the execution clearance.
Expected<TimedTrajectory> plan_trajectory(const VoxelMap& map, const Vec3& start, double start_yaw, const Vec3& goal,
                                          double goal_yaw, const PlannerConfig& config);

/// Tabular export: t x y z vx vy vz ax ay az yaw.
std::string export_trajectory(const TimedTrajectory& trajectory);

}  // namespace eaae
