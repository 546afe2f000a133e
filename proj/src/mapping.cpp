#include "eaae/mapping.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace eaae {

namespace {

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

constexpr char kDumpMagic[8] = {'E', 'A', 'A', 'E', 'V', 'O', 'X', '\0'};

}  // namespace

const char* to_string(VoxelState s) {
  switch (s) {
    case VoxelState::Unknown: return "unknown";
    case VoxelState::Free: return "free";
    case VoxelState::Occupied: return "occupied";
  }
  return "?";
}

MapGeometry MapGeometry::covering(const ObstacleBox& bounds, double resolution) {
  if (resolution <= 0.0) throw std::invalid_argument("map resolution must be positive");
  MapGeometry g;
  g.origin = bounds.min_corner;
  g.resolution = resolution;
  for (int a = 0; a < 3; ++a) {
    const double extent = bounds.max_corner[a] - bounds.min_corner[a];
    g.dims[a] = std::max(1, int(std::ceil(extent / resolution - 1e-9)));
  }
  return g;
}

Neighbors neighbors6(const MapGeometry& g, const VoxelKey& key) {
  static constexpr int d[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
  Neighbors n;
  for (const auto& o : d) {
    const VoxelKey k{key.i + o[0], key.j + o[1], key.k + o[2]};
    if (g.contains(k)) n.keys[n.count++] = k;
  }
  return n;
}

VoxelMap::VoxelMap(MapGeometry geometry, OccupancyParams params, std::vector<double> inflation_radii)
    : geometry_(geometry),
      params_(params),
      l_hit_(float(params.l_hit())),
      l_miss_(float(params.l_miss())),
      l_min_(float(params.l_min())),
      l_max_(float(params.l_max())),
      l_occ_(float(params.l_occ())),
      log_odds_(geometry.size(), 0.0f),
      state_(geometry.size(), std::uint8_t(VoxelState::Unknown)),
      stamp_(geometry.size(), 0u) {
  if (!(params.p_min < params.p_occ && params.p_occ < params.p_max))
    throw std::invalid_argument("occupancy params need p_min < p_occ < p_max");
  for (double r : inflation_radii) {
    InflationLayer layer;
    layer.radius = r;
    const int reach = int(std::floor(r / geometry.resolution + 1e-9));
    for (int dk = -reach; dk <= reach; ++dk)
      for (int dj = -reach; dj <= reach; ++dj)
        for (int di = -reach; di <= reach; ++di)
          if (std::sqrt(double(di * di + dj * dj + dk * dk)) * geometry.resolution <= r + 1e-9)
            layer.offsets.push_back({di, dj, dk});
    layer.counts.assign(geometry.size(), 0);
    layers_.push_back(std::move(layer));
  }
}

bool VoxelMap::is_free(const Vec3& p) const {
  const auto k = geometry_.key_of(p);
  return k && is_free(*k);
}
bool VoxelMap::is_unknown(const Vec3& p) const {
  const auto k = geometry_.key_of(p);
  return k && is_unknown(*k);
}
bool VoxelMap::is_occupied(const Vec3& p) const {
  const auto k = geometry_.key_of(p);
  return !k || is_occupied(*k);
}

void VoxelMap::on_occupancy_flip(std::size_t idx, bool became_occupied) {
  if (layers_.empty()) return;
  const VoxelKey c = geometry_.key_at(idx);
  for (auto& layer : layers_) {
    for (const auto& o : layer.offsets) {
      const VoxelKey k{c.i + o[0], c.j + o[1], c.k + o[2]};
      if (!geometry_.contains(k)) continue;
      auto& count = layer.counts[geometry_.index(k)];
      if (became_occupied)
        ++count;
      else
        --count;
    }
  }
}

void VoxelMap::apply(std::size_t idx, double delta) {
  float& l = log_odds_[idx];
  l = std::clamp(float(l + delta), l_min_, l_max_);
  const auto old_state = VoxelState(state_[idx]);
  const auto new_state = l >= l_occ_ ? VoxelState::Occupied : VoxelState::Free;
  if (old_state == new_state) return;
  state_[idx] = std::uint8_t(new_state);
  if (old_state == VoxelState::Free) --n_free_;
  if (old_state == VoxelState::Occupied) --n_occupied_;
  if (new_state == VoxelState::Free) ++n_free_;
  if (new_state == VoxelState::Occupied) ++n_occupied_;
  if ((old_state == VoxelState::Occupied) != (new_state == VoxelState::Occupied))
    on_occupancy_flip(idx, new_state == VoxelState::Occupied);
}

void VoxelMap::update(const VoxelKey& key, bool hit) { apply(geometry_.index(key), hit ? l_hit_ : l_miss_); }

void VoxelMap::integrate_scan(const DepthScan& scan) {
  ++scan_id_;
  if (scan_id_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0u);
    scan_id_ = 1;
  }
  const std::uint32_t id = scan_id_;
  // Endpoint voxel sits just past the surface so that obstacle faces lying
  // on voxel boundaries resolve to the obstacle side.
  constexpr double kSurfaceNudge = 1e-4;

  std::vector<std::size_t> endpoints(scan.rays.size(), std::size_t(-1));
  for (std::size_t r = 0; r < scan.rays.size(); ++r) {
    const auto& ray = scan.rays[r];
    if (!ray.distance) continue;
    const Vec3 end = scan.origin + ray.direction * (*ray.distance + kSurfaceNudge);
    const std::size_t idx = geometry_.index(geometry_.clamp_key(end));
    endpoints[r] = idx;
    if (stamp_[idx] != id) {
      stamp_[idx] = id;
      apply(idx, l_hit_);
    }
  }
  for (std::size_t r = 0; r < scan.rays.size(); ++r) {
    const auto& ray = scan.rays[r];
    const double length = ray.distance ? *ray.distance : scan.max_range;
    const Vec3 end = scan.origin + ray.direction * length;
    const std::size_t end_idx =
        ray.distance ? endpoints[r] : (geometry_.key_of(end) ? geometry_.index(*geometry_.key_of(end)) : std::size_t(-1));
    traverse_segment(geometry_, scan.origin, end, [&](const VoxelKey& k) {
      const std::size_t idx = geometry_.index(k);
      if (idx == end_idx) return false;
      if (stamp_[idx] != id) {
        stamp_[idx] = id;
        apply(idx, l_miss_);
      }
      return true;
    });
  }
}

PartitionCounts VoxelMap::partition_counts() const {
  const std::size_t total = geometry_.size();
  return {n_free_, n_occupied_, total - n_free_ - n_occupied_, total};
}

PartitionCounts VoxelMap::recount() const {
  PartitionCounts c;
  c.n_total = state_.size();
  for (auto s : state_) {
    switch (VoxelState(s)) {
      case VoxelState::Free: ++c.n_free; break;
      case VoxelState::Occupied: ++c.n_occupied; break;
      case VoxelState::Unknown: ++c.n_unknown; break;
    }
  }
  return c;
}

double VoxelMap::entropy() const {
  if (state_.empty()) return 0.0;
  // Saturated voxels dominate a mature map; their entropies are constants.
  const double h_min = binary_entropy(OccupancyParams::probability(l_min_));
  const double h_max = binary_entropy(OccupancyParams::probability(l_max_));
  double sum = 0.0;
  for (std::size_t i = 0; i < state_.size(); ++i) {
    if (state_[i] == std::uint8_t(VoxelState::Unknown)) {
      sum += 1.0;
      continue;
    }
    const float l = log_odds_[i];
    if (l == l_min_)
      sum += h_min;
    else if (l == l_max_)
      sum += h_max;
    else
      sum += binary_entropy(OccupancyParams::probability(l));
  }
  return sum / double(state_.size());
}

bool VoxelMap::occupied_within(const Vec3& p, double radius) const {
  const int reach = int(std::ceil(radius / geometry_.resolution)) + 1;
  const VoxelKey c = geometry_.raw_key(p);
  const double r2 = radius * radius;
  for (int dk = -reach; dk <= reach; ++dk)
    for (int dj = -reach; dj <= reach; ++dj)
      for (int di = -reach; di <= reach; ++di) {
        const VoxelKey k{c.i + di, c.j + dj, c.k + dk};
        if (!geometry_.contains(k) || !is_occupied(k)) continue;
        if ((geometry_.center(k) - p).squaredNorm() <= r2) return true;
      }
  return false;
}

bool VoxelMap::near_occupied(const VoxelKey& key, double radius) const {
  for (const auto& layer : layers_)
    if (std::abs(layer.radius - radius) < 1e-9) return layer.counts[geometry_.index(key)] > 0;
  return occupied_within(geometry_.center(key), radius + 1e-9);
}

void write_map_dump(const VoxelMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write map dump: " + path.string());
  const auto& g = map.geometry();
  out.write(kDumpMagic, sizeof kDumpMagic);
  const std::uint32_t version = kMapDumpVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  for (int d : g.dims) {
    const std::int32_t v = d;
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  out.write(reinterpret_cast<const char*>(&g.resolution), sizeof(double));
  for (int a = 0; a < 3; ++a) out.write(reinterpret_cast<const char*>(&g.origin[a]), sizeof(double));
  std::vector<char> states(g.size());
  for (std::size_t i = 0; i < states.size(); ++i) states[i] = char(map.state_at_index(i));
  out.write(states.data(), std::streamsize(states.size()));
  if (!out) throw std::runtime_error("failed writing map dump: " + path.string());
}

MapDump read_map_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map dump: " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kDumpMagic, sizeof magic) != 0)
    throw std::runtime_error("not a map dump: " + path.string());
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != kMapDumpVersion)
    throw std::runtime_error("unsupported map dump version " + std::to_string(version) + ": " + path.string());
  MapDump dump;
  for (int& d : dump.geometry.dims) {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    d = v;
  }
  in.read(reinterpret_cast<char*>(&dump.geometry.resolution), sizeof(double));
  for (int a = 0; a < 3; ++a) in.read(reinterpret_cast<char*>(&dump.geometry.origin[a]), sizeof(double));
  dump.states.resize(dump.geometry.size());
  in.read(reinterpret_cast<char*>(dump.states.data()), std::streamsize(dump.states.size()));
  if (!in) throw std::runtime_error("truncated map dump: " + path.string());
  return dump;
}

}  // namespace eaae
