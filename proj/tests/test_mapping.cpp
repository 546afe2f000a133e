#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eaae/mapping.hpp"

#include <filesystem>
#include <random>

using namespace eaae;

namespace {

MapGeometry box_geometry(int nx, int ny, int nz, double r = 0.1) {
  MapGeometry g;
  g.origin = Vec3::Zero();
  g.resolution = r;
  g.dims = {nx, ny, nz};
  return g;
}

double h2(double p) { return -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

DepthScan single_ray(const Vec3& origin, const Vec3& dir, std::optional<double> distance, double max_range = 5.0) {
  DepthScan s;
  s.origin = origin;
  s.max_range = max_range;
  s.rays.push_back({dir.normalized(), distance});
  return s;
}

Pose random_free_pose(const Scenario& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(s.bounds.min_corner.x() + 0.3, s.bounds.max_corner.x() - 0.3);
  std::uniform_real_distribution<double> uy(s.bounds.min_corner.y() + 0.3, s.bounds.max_corner.y() - 0.3);
  std::uniform_real_distribution<double> uz(0.3, 2.2), uyaw(-kPi, kPi);
  for (;;) {
    Pose p{Vec3(ux(rng), uy(rng), uz(rng)), uyaw(rng)};
    if (clearance_at(s, p.position) > 0.3) return p;
  }
}

}  // namespace

TEST_CASE("neighbors6 counts") {
  const auto g = box_geometry(10, 10, 10);
  CHECK(neighbors6(g, {0, 0, 0}).size() == 3);
  CHECK(neighbors6(g, {9, 9, 9}).size() == 3);
  CHECK(neighbors6(g, {0, 5, 5}).size() == 5);
  CHECK(neighbors6(g, {5, 5, 5}).size() == 6);
  CHECK(neighbors6(g, {0, 0, 5}).size() == 4);
  for (const auto& k : neighbors6(g, {5, 5, 5})) {
    const int manhattan = std::abs(k.i - 5) + std::abs(k.j - 5) + std::abs(k.k - 5);
    CHECK(manhattan == 1);
  }
}

TEST_CASE("fresh map") {
  VoxelMap map(box_geometry(10, 10, 10));
  CHECK(map.partition_counts() == PartitionCounts{0, 0, 1000, 1000});
  CHECK(map.entropy() == 1.0);
  CHECK(map.classify({3, 4, 5}) == VoxelState::Unknown);
  CHECK(map.is_occupied(Vec3(-0.01, 0.5, 0.5)));  // outside the grid
  CHECK_FALSE(map.is_free(Vec3(-0.01, 0.5, 0.5)));
}

TEST_CASE("classification after single updates") {
  VoxelMap map(box_geometry(3, 3, 3));
  map.update({0, 0, 0}, true);
  map.update({1, 0, 0}, false);
  CHECK(map.classify({0, 0, 0}) == VoxelState::Occupied);
  CHECK(map.classify({1, 0, 0}) == VoxelState::Free);
  CHECK(map.probability({0, 0, 0}) == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(map.probability({1, 0, 0}) == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(map.partition_counts() == PartitionCounts{1, 1, 25, 27});
}

TEST_CASE("clamping saturates") {
  VoxelMap map(box_geometry(1, 1, 1));
  const OccupancyParams p;
  double last_h = map.entropy();
  for (int n = 0; n < 40; ++n) {
    map.update({0, 0, 0}, true);
    CHECK(map.classify({0, 0, 0}) == VoxelState::Occupied);
    CHECK(map.entropy() <= last_h + 1e-12);
    last_h = map.entropy();
  }
  CHECK(map.log_odds({0, 0, 0}) == doctest::Approx(p.l_max()).epsilon(1e-6));
  CHECK(map.entropy() == doctest::Approx(h2(0.97)).epsilon(1e-6));

  last_h = 1.0;
  VoxelMap free_map(box_geometry(1, 1, 1));
  for (int n = 0; n < 40; ++n) {
    free_map.update({0, 0, 0}, false);
    CHECK(free_map.entropy() <= last_h + 1e-12);
    last_h = free_map.entropy();
  }
  CHECK(free_map.log_odds({0, 0, 0}) == doctest::Approx(p.l_min()).epsilon(1e-6));
  CHECK(free_map.entropy() == doctest::Approx(h2(0.12)).epsilon(1e-6));
  CHECK(free_map.entropy() < 1.0);
}

TEST_CASE("single axis-aligned ray") {
  // Origin in voxel 0, hit 2 m along +x: voxels 0..19 pierced, 20 holds the hit.
  VoxelMap map(box_geometry(40, 3, 3));
  map.integrate_scan(single_ray(Vec3(0.05, 0.15, 0.15), Vec3::UnitX(), 2.0));
  int n_free = 0;
  for (int i = 0; i < 40; ++i) {
    const auto s = map.classify({i, 1, 1});
    if (i < 20) {
      CHECK(s == VoxelState::Free);
      n_free += s == VoxelState::Free;
    } else if (i == 20) {
      CHECK(s == VoxelState::Occupied);
    } else {
      CHECK(s == VoxelState::Unknown);
    }
  }
  CHECK(n_free >= 19);
  CHECK(n_free <= 20);
  CHECK(map.partition_counts() == PartitionCounts{20, 1, 40 * 9 - 21, 40 * 9});
}

TEST_CASE("max-range miss has no endpoint hit") {
  VoxelMap map(box_geometry(40, 3, 3));
  map.integrate_scan(single_ray(Vec3(0.05, 0.15, 0.15), Vec3::UnitX(), std::nullopt, 1.0));
  const auto c = map.partition_counts();
  CHECK(c.n_occupied == 0);
  CHECK(c.n_free >= 10);
  CHECK(c.n_free <= 11);
}

TEST_CASE("one update per voxel per scan, hit wins") {
  VoxelMap map(box_geometry(40, 3, 3));
  DepthScan scan = single_ray(Vec3(0.05, 0.15, 0.15), Vec3::UnitX(), 2.0);
  scan.rays.push_back(scan.rays[0]);
  scan.rays.push_back({Vec3::UnitX(), 3.0});  // passes through the first hit voxel
  map.integrate_scan(scan);
  const OccupancyParams p;
  CHECK(map.log_odds({5, 1, 1}) == doctest::Approx(p.l_miss()).epsilon(1e-6));
  CHECK(map.log_odds({20, 1, 1}) == doctest::Approx(p.l_hit()).epsilon(1e-6));
  CHECK(map.log_odds({30, 1, 1}) == doctest::Approx(p.l_hit()).epsilon(1e-6));
}

TEST_CASE("depth scan geometry") {
  const SensorConfig cfg;
  const auto dirs = sensor_ray_directions(cfg);
  REQUIRE(dirs.size() == std::size_t(cfg.h_px * cfg.v_px));
  double max_az = 0.0;
  for (const auto& d : dirs) {
    CHECK(d.norm() == doctest::Approx(1.0));
    CHECK(d.x() > 0.0);
    const double az = std::atan2(std::abs(d.y()), d.x());
    const double el = std::atan2(std::abs(d.z()), d.x());
    CHECK(az <= 0.5 * cfg.fov_h + 1e-12);
    CHECK(el <= 0.5 * cfg.fov_v + 1e-12);
    max_az = std::max(max_az, az);
  }
  CHECK(max_az == doctest::Approx(0.5));

  // Flat wall 2 m ahead: every hit lies on the plane x = 2.
  Scenario room;
  room.bounds = {Vec3(-1, -5, 0), Vec3(2, 5, 3)};
  room.start.position = Vec3(0, 0, 1.5);
  const auto scan = render_depth_scan(room, Pose{Vec3(0, 0, 1.5), 0.0}, cfg);
  for (const auto& ray : scan.rays) {
    REQUIRE(ray.distance);
    CHECK(*ray.distance * ray.direction.x() == doctest::Approx(2.0));
    CHECK(*ray.distance >= 2.0 - 1e-12);
  }

  Scenario big;
  big.bounds = {Vec3(-20, -20, -20), Vec3(20, 20, 20)};
  const auto open = render_depth_scan(big, Pose{Vec3::Zero(), 0.3}, cfg);
  for (const auto& ray : open.rays) CHECK_FALSE(ray.distance);
}

TEST_CASE("scan sequences keep the partition and never revive unknown") {
  const auto s = builtin_scenario("pillars");
  const auto g = MapGeometry::covering(s.bounds, 0.1);
  VoxelMap map(g);
  VoxelMap twin(g);
  std::mt19937_64 rng(3);
  std::size_t last_unknown = map.partition_counts().n_unknown;
  for (int n = 0; n < 25; ++n) {
    const auto scan = render_depth_scan(s, random_free_pose(s, rng), SensorConfig{});
    map.integrate_scan(scan);
    twin.integrate_scan(scan);
    const auto c = map.partition_counts();
    CHECK(c.n_free + c.n_occupied + c.n_unknown == c.n_total);
    CHECK(c == map.recount());
    CHECK(c.n_unknown <= last_unknown);
    last_unknown = c.n_unknown;
  }
  CHECK(map.entropy() < 1.0);
  CHECK(map.entropy() == twin.entropy());
  bool same = true;
  for (std::size_t i = 0; i < g.size(); ++i) same &= map.state_at_index(i) == twin.state_at_index(i);
  CHECK(same);
}

TEST_CASE("inflation layers agree with a brute-force search") {
  const auto g = box_geometry(20, 20, 8);
  const std::vector<double> radii{0.3, 0.4};
  VoxelMap map(g, {}, radii);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> ui(0, 19), uk(0, 7);
  std::bernoulli_distribution hit(0.5);
  for (int round = 0; round < 6; ++round) {
    for (int n = 0; n < 80; ++n) map.update({ui(rng), ui(rng), uk(rng)}, hit(rng));
    for (std::size_t idx = 0; idx < g.size(); idx += 7) {
      const VoxelKey key = g.key_at(idx);
      for (double r : radii) {
        bool oracle = false;
        for (std::size_t o = 0; o < g.size() && !oracle; ++o) {
          const VoxelKey ko = g.key_at(o);
          oracle = map.is_occupied(ko) && (g.center(ko) - g.center(key)).norm() <= r + 1e-9;
        }
        CHECK(map.near_occupied(key, r) == oracle);
        CHECK(map.occupied_within(g.center(key), r + 1e-9) == oracle);
      }
    }
  }
}

TEST_CASE("map dump round trip") {
  const auto s = builtin_scenario("simple");
  VoxelMap map(MapGeometry::covering(s.bounds, 0.1));
  map.integrate_scan(render_depth_scan(s, s.start, SensorConfig{}));
  const auto path = std::filesystem::temp_directory_path() / "eaae_map_dump.bin";
  write_map_dump(map, path);
  const auto dump = read_map_dump(path);
  CHECK(dump.geometry.dims == map.geometry().dims);
  CHECK(dump.geometry.resolution == map.geometry().resolution);
  CHECK(dump.geometry.origin == map.geometry().origin);
  REQUIRE(dump.states.size() == map.geometry().size());
  bool same = true;
  for (std::size_t i = 0; i < dump.states.size(); ++i) same &= dump.states[i] == std::uint8_t(map.state_at_index(i));
  CHECK(same);
  std::filesystem::remove(path);
  CHECK_THROWS(read_map_dump(path));
}
