#include "eaae/planning.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>

namespace eaae {

double PathPolyline::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) len += (waypoints[i] - waypoints[i - 1]).norm();
  return len;
}

bool traversable(const VoxelMap& map, const VoxelKey& key, double clearance) {
  return map.geometry().contains(key) && map.is_free(key) && !map.near_occupied(key, clearance);
}

namespace {

template <class Admit>
bool segment_clear(const MapGeometry& g, const Vec3& from, const Vec3& to, Admit&& admit) {
  const auto from_key = g.key_of(from);
  if (!from_key || !g.key_of(to)) return false;
  bool clear = true;
  traverse_segment(g, from, to, [&](const VoxelKey& k) {
    if (k == *from_key) return true;
    if (!admit(k)) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

}  // namespace

bool line_of_sight(const VoxelMap& map, const Vec3& from, const Vec3& to, double clearance) {
  return segment_clear(map.geometry(), from, to,
                       [&](const VoxelKey& k) { return traversable(map, k, clearance); });
}

Expected<PathPolyline> plan_path(const VoxelMap& map, const Vec3& start, const Vec3& goal, double clearance) {
  const auto& g = map.geometry();
  const auto start_key = g.key_of(start);
  const auto goal_key = g.key_of(goal);
  if (!start_key) return Failure{FailureKind::Unreachable, "start outside map"};
  if (!goal_key) return Failure{FailureKind::Unreachable, "goal outside map"};
  if ((goal - start).norm() < 1e-9) return PathPolyline{{start}};

  const double escape2 = clearance * clearance;
  auto admit = [&](const VoxelKey& k) {
    if (k == *start_key) return true;
    if (!map.is_free(k)) return false;
    if (!map.near_occupied(k, clearance)) return true;
    return (g.center(k) - start).squaredNorm() <= escape2;
  };
  if (!admit(*goal_key)) return Failure{FailureKind::Unreachable, "goal not traversable"};

  const std::size_t n = g.size();
  const std::size_t s_idx = g.index(*start_key);
  const std::size_t g_idx = g.index(*goal_key);
  constexpr float kInf = std::numeric_limits<float>::infinity();
  std::vector<float> cost(n, kInf);
  std::vector<std::int32_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  const Vec3 goal_center = g.center(*goal_key);
  auto heuristic = [&](const VoxelKey& k) { return (g.center(k) - goal_center).norm(); };

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[s_idx] = 0.0f;
  open.push({heuristic(*start_key), s_idx});
  bool found = false;
  while (!open.empty()) {
    const auto [f, idx] = open.top();
    open.pop();
    if (closed[idx]) continue;
    closed[idx] = 1;
    if (idx == g_idx) {
      found = true;
      break;
    }
    const VoxelKey k = g.key_at(idx);
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (!di && !dj && !dk) continue;
          const VoxelKey nb{k.i + di, k.j + dj, k.k + dk};
          if (!g.contains(nb)) continue;
          const std::size_t nidx = g.index(nb);
          if (closed[nidx] || !admit(nb)) continue;
          // Diagonal moves may not cut past blocked voxels.
          bool corner_clear = true;
          for (int m = 1; m < 7 && corner_clear; ++m) {
            const VoxelKey c{k.i + (m & 1 ? di : 0), k.j + (m & 2 ? dj : 0), k.k + (m & 4 ? dk : 0)};
            if (c != nb && c != k) corner_clear = admit(c);
          }
          if (!corner_clear) continue;
          const double step = g.resolution * std::sqrt(double(di * di + dj * dj + dk * dk));
          const float c = float(cost[idx] + step);
          if (c < cost[nidx]) {
            cost[nidx] = c;
            parent[nidx] = std::int32_t(idx);
            open.push({c + heuristic(nb), nidx});
          }
        }
  }
  if (!found) return Failure{FailureKind::Unreachable, "no free-space path"};

  std::vector<Vec3> raw;
  for (std::int64_t idx = std::int64_t(g_idx); idx != -1; idx = parent[std::size_t(idx)])
    raw.push_back(g.center(g.key_at(std::size_t(idx))));
  std::reverse(raw.begin(), raw.end());
  raw.front() = start;
  if (raw.size() == 1)
    raw.push_back(goal);
  else
    raw.back() = goal;

  PathPolyline path;
  path.waypoints.push_back(raw.front());
  std::size_t anchor = 0;
  while (anchor + 1 < raw.size()) {
    std::size_t j = anchor + 1;
    while (j + 1 < raw.size() && segment_clear(g, raw[anchor], raw[j + 1], admit)) ++j;
    path.waypoints.push_back(raw[j]);
    anchor = j;
  }
  return path;
}

std::optional<double> first_collision(const TimedTrajectory& trajectory, const VoxelMap& map,
                                      const CollisionCheck& check, std::size_t from_index) {
  if (trajectory.empty()) return std::nullopt;
  const auto& g = map.geometry();
  const Vec3 first = trajectory.samples.front().position;
  const Vec3 last = trajectory.samples.back().position;
  for (std::size_t i = from_index; i < trajectory.samples.size(); ++i) {
    const auto& s = trajectory.samples[i];
    const auto key = g.key_of(s.position);
    if (!key) return s.t;
    const VoxelState st = map.state(*key);
    if (st == VoxelState::Occupied) return s.t;
    if ((s.position - first).norm() > check.start_grace && map.near_occupied(*key, check.clearance)) return s.t;
    if (st == VoxelState::Unknown && (s.position - last).norm() > check.d_grace) return s.t;
  }
  return std::nullopt;
}

Expected<TimedTrajectory> plan_trajectory(const VoxelMap& map, const Vec3& start, double start_yaw, const Vec3& goal,
                                          double goal_yaw, const PlannerConfig& config) {
  auto path = plan_path(map, start, goal, config.clearance);
  if (!path) return path.error();
  const CollisionCheck check{config.collision_clearance, config.d_grace, config.clearance};
  MotionLimits limits = config.limits;
  for (int attempt = 0; attempt < 5; ++attempt) {
    TimedTrajectory traj = time_parameterize(*path, start_yaw, goal_yaw, limits, config.dt);
    if (!first_collision(traj, map, check)) return traj;
    limits.corner_round *= 0.5;
  }
  return Failure{FailureKind::Clearance, "rounded corners leave free space"};
}

}  // namespace eaae
