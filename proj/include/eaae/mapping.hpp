#pragma once

#include "eaae/common.hpp"
#include "eaae/world.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

namespace eaae {

struct VoxelKey {
  int i = 0;
  int j = 0;
  int k = 0;
  auto operator<=>(const VoxelKey&) const = default;
};

/// Dense voxel lattice over the workspace. Voxel (i,j,k) covers
/// [origin + (i,j,k)*r, origin + (i+1,j+1,k+1)*r).
struct MapGeometry {
  Vec3 origin = Vec3::Zero();
  double resolution = 0.1;
  std::array<int, 3> dims{0, 0, 0};

  static MapGeometry covering(const ObstacleBox& bounds, double resolution);

  std::size_t size() const { return std::size_t(dims[0]) * dims[1] * dims[2]; }
  bool contains(const VoxelKey& key) const {
    return key.i >= 0 && key.j >= 0 && key.k >= 0 && key.i < dims[0] && key.j < dims[1] && key.k < dims[2];
  }
  std::size_t index(const VoxelKey& key) const {
    return (std::size_t(key.k) * dims[1] + key.j) * dims[0] + key.i;
  }
  VoxelKey key_at(std::size_t idx) const {
    const int i = int(idx % dims[0]);
    idx /= dims[0];
    return {i, int(idx % dims[1]), int(idx / dims[1])};
  }
  /// Unclamped lattice coordinates of a point.
  VoxelKey raw_key(const Vec3& p) const {
    const Vec3 q = (p - origin) / resolution;
    return {int(std::floor(q.x())), int(std::floor(q.y())), int(std::floor(q.z()))};
  }
  std::optional<VoxelKey> key_of(const Vec3& p) const {
    const VoxelKey k = raw_key(p);
    if (!contains(k)) return std::nullopt;
    return k;
  }
  VoxelKey clamp_key(const Vec3& p) const {
    VoxelKey k = raw_key(p);
    k.i = std::clamp(k.i, 0, dims[0] - 1);
    k.j = std::clamp(k.j, 0, dims[1] - 1);
    k.k = std::clamp(k.k, 0, dims[2] - 1);
    return k;
  }
  Vec3 center(const VoxelKey& key) const {
    return origin + resolution * Vec3(key.i + 0.5, key.j + 0.5, key.k + 0.5);
  }
  Vec3 extent_max() const { return origin + resolution * Vec3(dims[0], dims[1], dims[2]); }
};

enum class VoxelState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

const char* to_string(VoxelState s);

/// Log-odds sensor model. Probabilities are stored as log(p / (1 - p)).
struct OccupancyParams {
  double p_hit = 0.7;
  double p_miss = 0.4;
  double p_min = 0.12;
  double p_max = 0.97;
  double p_occ = 0.5;

  static double logit(double p) { return std::log(p / (1.0 - p)); }
  static double probability(double l) { return 1.0 / (1.0 + std::exp(-l)); }
  double l_hit() const { return logit(p_hit); }
  double l_miss() const { return logit(p_miss); }
  double l_min() const { return logit(p_min); }
  double l_max() const { return logit(p_max); }
  double l_occ() const { return logit(p_occ); }
};

struct PartitionCounts {
  std::size_t n_free = 0;
  std::size_t n_occupied = 0;
  std::size_t n_unknown = 0;
  std::size_t n_total = 0;
  bool operator==(const PartitionCounts&) const = default;
};

/// Up to six face neighbours; out-of-grid neighbours are omitted.
struct Neighbors {
  std::array<VoxelKey, 6> keys;
  int count = 0;
  const VoxelKey* begin() const { return keys.data(); }
  const VoxelKey* end() const { return keys.data() + count; }
  int size() const { return count; }
};

Neighbors neighbors6(const MapGeometry& geometry, const VoxelKey& key);

/// Forward-facing depth camera. The optical axis is body +x; pixels form a
/// pinhole grid whose outermost columns/rows sit at +-fov/2.
struct SensorConfig {
  int h_px = 64;
  int v_px = 48;
  double fov_h = 1.0;
  double fov_v = 0.75;
  double d_min = 0.5;
  double d_max = 5.0;
  double rate_hz = 30.0;
};

struct DepthRay {
  Vec3 direction;                  // unit, world frame
  std::optional<double> distance;  // nullopt: nothing within d_max
};

struct DepthScan {
  Vec3 origin = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();
  double max_range = 5.0;
  std::vector<DepthRay> rays;
};

/// Camera-frame unit directions for every pixel, row-major from the lower
/// left.
std::vector<Vec3> sensor_ray_directions(const SensorConfig& config);

/// Returns hits in [d_min, d_max]; rays hitting closer than d_min carry no
/// measurement and are dropped.
DepthScan render_depth_scan(const Scenario& scenario, const Vec3& position, const Mat3& orientation,
                            const SensorConfig& config);
DepthScan render_depth_scan(const Scenario& scenario, const Pose& pose, const SensorConfig& config);

/// Visits the voxels pierced by segment [from, to] in order (3D DDA),
/// clipped to the grid. The visitor returns false to stop early.
template <class Visitor>
void traverse_segment(const MapGeometry& g, const Vec3& from, const Vec3& to, Visitor&& visit) {
  const Vec3 d = to - from;
  const Vec3 lo = g.origin;
  const Vec3 hi = g.extent_max();
  double t0 = 0.0;
  double t1 = 1.0;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (from[a] < lo[a] || from[a] > hi[a]) return;
      continue;
    }
    double ta = (lo[a] - from[a]) / d[a];
    double tb = (hi[a] - from[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return;

  const Vec3 p = from + t0 * d;
  VoxelKey key = g.clamp_key(p);
  std::array<int, 3> step{};
  std::array<double, 3> t_max{};
  std::array<double, 3> t_delta{};
  int* comp[3] = {&key.i, &key.j, &key.k};
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] > 0.0) {
      step[a] = 1;
      t_delta[a] = g.resolution / d[a];
      t_max[a] = (g.origin[a] + (*comp[a] + 1) * g.resolution - from[a]) / d[a];
    } else if (d[a] < 0.0) {
      step[a] = -1;
      t_delta[a] = -g.resolution / d[a];
      t_max[a] = (g.origin[a] + *comp[a] * g.resolution - from[a]) / d[a];
    } else {
      step[a] = 0;
      t_delta[a] = inf;
      t_max[a] = inf;
    }
  }
  const int max_steps = g.dims[0] + g.dims[1] + g.dims[2] + 3;
  for (int n = 0; n < max_steps; ++n) {
    if (!visit(static_cast<const VoxelKey&>(key))) return;
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    if (t_max[a] > t1) return;
    *comp[a] += step[a];
    if (!g.contains(key)) return;
    t_max[a] += t_delta[a];
  }
}

/// Probabilistic occupancy grid. Voxels never touched by a measurement are
/// unknown; touched voxels are occupied iff p >= p_occ. Partition counts are
/// maintained incrementally. Optional inflation layers track, per voxel,
/// whether an occupied voxel centre lies within a fixed radius.
class VoxelMap {
 public:
  explicit VoxelMap(MapGeometry geometry, OccupancyParams params = {}, std::vector<double> inflation_radii = {});

  const MapGeometry& geometry() const { return geometry_; }
  const OccupancyParams& params() const { return params_; }

  VoxelState state(const VoxelKey& key) const { return VoxelState(state_[geometry_.index(key)]); }
  VoxelState state_at_index(std::size_t idx) const { return VoxelState(state_[idx]); }
  VoxelState classify(const VoxelKey& key) const { return state(key); }
  bool is_free(const VoxelKey& key) const { return state(key) == VoxelState::Free; }
  bool is_unknown(const VoxelKey& key) const { return state(key) == VoxelState::Unknown; }
  bool is_occupied(const VoxelKey& key) const { return state(key) == VoxelState::Occupied; }
  // Points outside the grid are outside the workspace: occupied, not free.
  bool is_free(const Vec3& p) const;
  bool is_unknown(const Vec3& p) const;
  bool is_occupied(const Vec3& p) const;

  double log_odds(const VoxelKey& key) const { return log_odds_[geometry_.index(key)]; }
  double probability(const VoxelKey& key) const { return OccupancyParams::probability(log_odds(key)); }

  /// One hit or miss update with clamping.
  void update(const VoxelKey& key, bool hit);

  /// Ray-casting update: voxels pierced before each ray's endpoint get one
  /// miss update, endpoint voxels of real hits one hit update. Each voxel is
  /// updated at most once per scan and a hit takes precedence.
  void integrate_scan(const DepthScan& scan);

  PartitionCounts partition_counts() const;
  /// Recount from scratch (cross-check for the incremental counters).
  PartitionCounts recount() const;

  /// Mean binary Shannon entropy over all voxels, bits/cell (unknown: 1).
  double entropy() const;

  /// True iff some occupied voxel centre lies within `radius` of the voxel
  /// centre. Constant time for radii registered at construction.
  bool near_occupied(const VoxelKey& key, double radius) const;
  /// Exact point query: occupied voxel centre within radius of p.
  bool occupied_within(const Vec3& p, double radius) const;

  Neighbors neighbors6(const VoxelKey& key) const { return eaae::neighbors6(geometry_, key); }

 private:
  struct InflationLayer {
    double radius;
    std::vector<std::array<int, 3>> offsets;
    std::vector<std::uint16_t> counts;
  };

  void apply(std::size_t idx, double delta);
  void on_occupancy_flip(std::size_t idx, bool became_occupied);

  MapGeometry geometry_;
  OccupancyParams params_;
  float l_hit_, l_miss_, l_min_, l_max_, l_occ_;
  std::vector<float> log_odds_;
  std::vector<std::uint8_t> state_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t scan_id_ = 0;
  std::size_t n_free_ = 0;
  std::size_t n_occupied_ = 0;
  std::vector<InflationLayer> layers_;
};

/// Binary map export: "EAAEVOX" magic, format version, dims, resolution,
/// origin, then one state byte per voxel (0 unknown, 1 free, 2 occupied) in
/// index order (i fastest, then j, then k). Little-endian.
struct MapDump {
  MapGeometry geometry;
  std::vector<std::uint8_t> states;
};
inline constexpr std::uint32_t kMapDumpVersion = 1;
void write_map_dump(const VoxelMap& map, const std::filesystem::path& path);
MapDump read_map_dump(const std::filesystem::path& path);

}  // namespace eaae
