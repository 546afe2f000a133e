#include "eaae/mapping.hpp"

namespace eaae {

std::vector<Vec3> sensor_ray_directions(const SensorConfig& c) {
  std::vector<Vec3> dirs;
  dirs.reserve(std::size_t(c.h_px) * c.v_px);
  const double th = std::tan(0.5 * c.fov_h);
  const double tv = std::tan(0.5 * c.fov_v);
  for (int v = 0; v < c.v_px; ++v) {
    const double sv = c.v_px > 1 ? -tv + 2.0 * tv * v / (c.v_px - 1) : 0.0;
    for (int u = 0; u < c.h_px; ++u) {
      // Column 0 is the leftmost pixel (+y in the camera frame).
      const double su = c.h_px > 1 ? th - 2.0 * th * u / (c.h_px - 1) : 0.0;
      dirs.push_back(Vec3(1.0, su, sv).normalized());
    }
  }
  return dirs;
}

DepthScan render_depth_scan(const Scenario& scenario, const Vec3& position, const Mat3& orientation,
                            const SensorConfig& config) {
  // Pixel directions depend only on the config; cache the last one.
  thread_local SensorConfig cached_config{-1};
  thread_local std::vector<Vec3> cached_dirs;
  if (cached_config.h_px != config.h_px || cached_config.v_px != config.v_px ||
      cached_config.fov_h != config.fov_h || cached_config.fov_v != config.fov_v) {
    cached_dirs = sensor_ray_directions(config);
    cached_config = config;
  }

  DepthScan scan;
  scan.origin = position;
  scan.orientation = orientation;
  scan.max_range = config.d_max;
  scan.rays.reserve(cached_dirs.size());
  for (const Vec3& body_dir : cached_dirs) {
    const Vec3 dir = orientation * body_dir;
    const auto hit = raycast(scenario, position, dir, config.d_max);
    if (hit && *hit < config.d_min) continue;
    scan.rays.push_back({dir, hit});
  }
  return scan;
}

DepthScan render_depth_scan(const Scenario& scenario, const Pose& pose, const SensorConfig& config) {
  return render_depth_scan(scenario, pose.position, yaw_rotation(pose.yaw), config);
}

}  // namespace eaae
