#include "eaae/bench.hpp"

#include <map>
#include <mutex>
#include <sstream>

namespace eaae {

namespace {

std::vector<double> axis_samples(double lo, double hi, double step) {
  const double mid = 0.5 * (lo + hi);
  const int n = int(std::floor((0.5 * (hi - lo)) / step));
  std::vector<double> out;
  for (int k = -n; k <= n; ++k) out.push_back(mid + k * step);
  return out;
}

std::string cache_key(const Scenario& scenario, const SensorConfig& s, const OccupancyParams& o, double resolution,
                      const ObservabilityConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << dump_scenario(scenario) << '|' << s.h_px << ',' << s.v_px << ',' << s.fov_h << ',' << s.fov_v << ','
     << s.d_min << ',' << s.d_max << '|' << o.p_hit << ',' << o.p_miss << ',' << o.p_min << ',' << o.p_max << ','
     << o.p_occ << '|' << resolution << '|' << c.grid_step << ',' << c.n_yaw << ',' << c.clearance;
  for (double h : c.heights) os << ',' << h;
  return os.str();
}

std::shared_ptr<const ObservableSet> compute(const Scenario& scenario, const SensorConfig& sensor,
                                             const OccupancyParams& occupancy, double resolution,
                                             const ObservabilityConfig& config) {
  VoxelMap map(MapGeometry::covering(scenario.bounds, resolution), occupancy);
  const auto xs = axis_samples(scenario.bounds.min_corner.x(), scenario.bounds.max_corner.x(), config.grid_step);
  const auto ys = axis_samples(scenario.bounds.min_corner.y(), scenario.bounds.max_corner.y(), config.grid_step);
  for (double z : config.heights)
    for (double y : ys)
      for (double x : xs) {
        const Vec3 p(x, y, z);
        if (point_in_obstacle(scenario, p) || clearance_at(scenario, p) < config.clearance) continue;
        for (int k = 0; k < config.n_yaw; ++k)
          map.integrate_scan(render_depth_scan(scenario, Pose{p, 2.0 * kPi * k / config.n_yaw}, sensor));
      }

  auto set = std::make_shared<ObservableSet>();
  set->geometry = map.geometry();
  const auto& g = set->geometry;
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        const VoxelKey key{i, j, k};
        if (map.is_unknown(key) || point_in_obstacle(scenario, g.center(key))) continue;
        set->indices.push_back(std::uint32_t(g.index(key)));
      }
  return set;
}

}  // namespace

std::shared_ptr<const ObservableSet> observable_free_set(const Scenario& scenario, const SensorConfig& sensor,
                                                         const OccupancyParams& occupancy, double resolution,
                                                         const ObservabilityConfig& config) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const ObservableSet>> cache;
  const std::string key = cache_key(scenario, sensor, occupancy, resolution, config);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto set = compute(scenario, sensor, occupancy, resolution, config);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(set)).first->second;
}

double explored_fraction(const VoxelMap& map, const ObservableSet& set) {
  if (set.indices.empty()) return 1.0;
  std::size_t known = 0;
  for (std::uint32_t idx : set.indices)
    if (map.state_at_index(idx) != VoxelState::Unknown) ++known;
  return double(known) / double(set.indices.size());
}

}  // namespace eaae
