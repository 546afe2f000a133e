#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eaae/bench.hpp"
#include "eaae/config_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace eaae;

namespace {

MissionConfig simple_config(int max_cycles, std::uint64_t seed = 0) {
  MissionConfig c;
  c.scenario = builtin_scenario("simple");
  c.seed = seed;
  c.termination.max_cycles = max_cycles;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) { return std::size_t(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("observable set") {
  const MissionConfig c = simple_config(0);
  const auto set = observable_free_set(c.scenario, c.sensor, c.occupancy, c.resolution, c.observability);
  // Open 20 x 20 x 2.5 m room: every voxel is seen from some oracle pose.
  CHECK(set->indices.size() == 1000000);
  CHECK(set == observable_free_set(c.scenario, c.sensor, c.occupancy, c.resolution, c.observability));

  const auto pillars = builtin_scenario("pillars");
  const auto ps = observable_free_set(pillars, c.sensor, c.occupancy, c.resolution, c.observability);
  const auto& g = ps->geometry;
  CHECK(ps->indices.size() < g.size() - 9 * 6 * 6 * 25 + 1);
  for (auto idx : ps->indices) REQUIRE_FALSE(point_in_obstacle(pillars, g.center(g.key_at(idx))));

  VoxelMap empty(g);
  CHECK(explored_fraction(empty, *ps) == 0.0);
}

TEST_CASE("zero cycles: one scan, no energy") {
  MissionConfig c = simple_config(0);
  c.randomize_start_yaw = false;
  const auto log = run_mission(c);
  CHECK(log.summary.termination == Termination::MaxCycles);
  CHECK(log.summary.total_energy == 0.0);
  CHECK(log.summary.completion_time == 0.0);
  CHECK(log.cycles.empty());

  // Independent replay of the single initial scan.
  VoxelMap map(MapGeometry::covering(c.scenario.bounds, c.resolution), c.occupancy);
  map.integrate_scan(render_depth_scan(c.scenario, c.scenario.start, c.sensor));
  const auto set = observable_free_set(c.scenario, c.sensor, c.occupancy, c.resolution, c.observability);
  std::size_t known = 0;
  for (auto idx : set->indices) known += map.state_at_index(idx) != VoxelState::Unknown;
  const double expected = double(known) / double(set->indices.size());
  CHECK(expected > 0.0);
  CHECK(log.summary.explored_fraction == doctest::Approx(expected).epsilon(1e-12));
  REQUIRE(log.series.size() == 1);
  CHECK(log.series[0].explored_fraction == log.summary.explored_fraction);
  CHECK(log.series[0].entropy == doctest::Approx(map.entropy()).epsilon(1e-12));
}

TEST_CASE("short mission: accounting closure and monotone series") {
  const auto log = run_mission(simple_config(6, 3));
  const auto& s = log.summary;
  REQUIRE(s.completion_time > 0.0);
  CHECK(s.mean_power * s.completion_time == doctest::Approx(s.total_energy).epsilon(1e-6));
  double legs = 0.0;
  for (const auto& c : log.cycles) legs += c.leg_energy + c.hover_energy;
  CHECK(legs == doctest::Approx(s.total_energy).epsilon(1e-6));
  CHECK(s.mean_power > 100.0);
  CHECK(s.mean_power < 250.0);

  for (std::size_t i = 1; i < log.series.size(); ++i) {
    CHECK(log.series[i].t > log.series[i - 1].t);
    CHECK(log.series[i].explored_fraction >= log.series[i - 1].explored_fraction);
    CHECK(log.series[i].cum_energy >= log.series[i - 1].cum_energy);
  }
  CHECK(log.series.back().cum_energy == s.total_energy);
  CHECK(log.series.back().t == s.completion_time);
  CHECK(log.series.back().entropy == s.final_entropy);
  CHECK(log.series.back().explored_fraction == s.explored_fraction);

  std::size_t last_unknown = std::numeric_limits<std::size_t>::max();
  const double r_max = simple_config(0).cluster_radius_limit();
  for (const auto& c : log.cycles) {
    CHECK(c.partition_ok);
    CHECK(c.counts.n_free + c.counts.n_occupied + c.counts.n_unknown == c.counts.n_total);
    CHECK(c.counts.n_unknown <= last_unknown);
    last_unknown = c.counts.n_unknown;
    CHECK(c.max_cluster_radius <= r_max);
    CHECK(c.target_cluster >= 0);
    CHECK(c.predicted_energy.has_value());
  }
}

TEST_CASE("determinism") {
  const auto a = run_mission(simple_config(4, 11));
  const auto b = run_mission(simple_config(4, 11));
  CHECK(summary_row({0, 0, a}) == summary_row({0, 0, b}));
  CHECK(a.series == b.series);
  REQUIRE(a.cycles.size() == b.cycles.size());
  for (std::size_t i = 0; i < a.cycles.size(); ++i) {
    CHECK(a.cycles[i].target_cluster == b.cycles[i].target_cluster);
    CHECK(a.cycles[i].leg_energy == b.cycles[i].leg_energy);
  }
  // A different seed changes the start heading and hence the run.
  const auto c = run_mission(simple_config(4, 12));
  CHECK(summary_row({0, 0, a}) != summary_row({0, 0, c}));
}

TEST_CASE("series round trip") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0), big(0.0, 1e5);
  std::vector<SeriesPoint> series;
  for (int i = 0; i < 200; ++i) series.push_back({i * 0.37 + u(rng), u(rng), big(rng), u(rng)});
  series.push_back({1.0 / 3.0, 0.1, 1e-300, 5e-324});
  CHECK(parse_series_csv(series_csv(series)) == series);
  CHECK_THROWS(parse_series_csv("t,x\n"));
  CHECK_THROWS(parse_series_csv(std::string(kSeriesHeader) + "\n1,2,3\n"));
  CHECK_THROWS(parse_series_csv(std::string(kSeriesHeader) + "\n1,2,3,abc\n"));
}

TEST_CASE("statistics") {
  auto s = compute_stats({4.0, 1.0, 3.0, 2.0});
  CHECK(s.median == 2.5);
  CHECK(s.mean == 2.5);
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  s = compute_stats({5.0, 1.0, 9.0});
  CHECK(s.median == 5.0);
  s = compute_stats({7.25});
  CHECK(s.median == 7.25);
  CHECK(s.mean == 7.25);
  CHECK_THROWS_AS(compute_stats({}), std::invalid_argument);
}

TEST_CASE("config overlay") {
  MissionConfig c;
  apply_config_json(c, R"({"limits": {"v_max": 3.5}, "policy": {"top_k": 2}, "quad": {"inertia_diag": [1, 2, 3]}})");
  CHECK(c.policy_config.candidate.planner.limits.v_max == 3.5);
  CHECK(c.policy_config.top_k == 2);
  CHECK(c.policy_config.candidate.quad.inertia_diag == Vec3(1, 2, 3));

  CHECK_THROWS_WITH_AS(apply_config_json(c, R"({"policy": {"topk": 2}})"), doctest::Contains("policy.topk"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(apply_config_json(c, R"({"sensorz": {}})"), doctest::Contains("sensorz"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(apply_config_json(c, R"({"sensor": {"d_max": "far"}})"), doctest::Contains("sensor.d_max"),
                       std::invalid_argument);
  CHECK_THROWS_AS(apply_config_json(c, R"({"quad": {"inertia_diag": [1, 2]}})"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_json(c, "{"), std::invalid_argument);

  // Dumped defaults read back unchanged.
  MissionConfig d;
  const std::string dumped = config_to_json(d);
  MissionConfig e;
  apply_config_json(e, dumped);
  CHECK(config_to_json(e) == dumped);

  CHECK_THROWS_AS(apply_config_file(e, "/nonexistent/config.json"), std::invalid_argument);
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    MissionConfig c = simple_config(1);
    mutate(c);
    return c;
  };
  CHECK_NOTHROW(simple_config(1).validate());
  CHECK_THROWS_WITH_AS(bad([](MissionConfig& c) { c.resolution = 0; }).validate(), doctest::Contains("resolution"),
                       std::invalid_argument);
  CHECK_THROWS_AS(bad([](MissionConfig& c) { c.sensor.d_min = 6; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](MissionConfig& c) { c.occupancy.p_hit = 0.4; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](MissionConfig& c) { c.policy_config.top_k = 0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](MissionConfig& c) { c.policy_config.candidate.quad.mass = -1; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_mission(bad([](MissionConfig& c) { c.policy_config.candidate.planner.limits.a_max = 0; })),
                  std::invalid_argument);
}

TEST_CASE("benchmark counting and outputs") {
  BenchmarkRequest req;
  req.scenarios = {builtin_scenario("simple"), builtin_scenario("pillars")};
  req.policies = all_policies();
  req.runs = 2;
  req.base_seed = 40;
  req.base.termination.max_cycles = 1;
  req.jobs = 4;
  int callbacks = 0;
  const auto report = run_benchmark(req, [&](const RunResult&) { ++callbacks; });
  REQUIRE(report.runs.size() == 12);
  CHECK(callbacks == 12);
  REQUIRE(report.groups.size() == 6);
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& r = report.runs[i];
    CHECK(r.run == int(i));
    CHECK(r.run_index == int(i % 2));
    CHECK(r.log.seed == 40 + i % 2);
    CHECK(r.log.scenario == (i < 6 ? "simple" : "pillars"));
    CHECK(r.log.policy == all_policies()[(i / 2) % 3]);
  }
  for (const auto& g : report.groups) {
    REQUIRE(g.runs.size() == 2);
    std::vector<double> e;
    for (int r : g.runs) e.push_back(report.runs[std::size_t(r)].log.summary.total_energy);
    CHECK(g.total_energy.mean == doctest::Approx(0.5 * (e[0] + e[1])));
    CHECK(g.total_energy.median == g.total_energy.mean);
    CHECK(g.total_energy.min == std::min(e[0], e[1]));
  }

  // Single run: median equals mean equals the value.
  const auto single = aggregate_group({&report.runs[0]});
  CHECK(single.completion_time.median == report.runs[0].log.summary.completion_time);
  CHECK(single.completion_time.mean == report.runs[0].log.summary.completion_time);

  const auto dir = std::filesystem::temp_directory_path() / "eaae_bench_outputs";
  std::filesystem::remove_all(dir);
  emit_outputs(report, dir);
  const auto summary = slurp(dir / "summary.csv");
  CHECK(summary.rfind(std::string(kSummaryHeader) + "\n", 0) == 0);
  CHECK(line_count(summary) == 13);
  for (int r = 0; r < 12; ++r) {
    const auto path = dir / ("series_" + std::to_string(r) + ".csv");
    CHECK(read_series_file(path) == report.runs[std::size_t(r)].log.series);
  }
  const auto timings = slurp(dir / "timings.csv");
  CHECK(timings.find("clustering_ms") != std::string::npos);
  CHECK(timings.find("trajectory_ms") != std::string::npos);
  CHECK(timings.find("energy_ms") != std::string::npos);
  CHECK(line_count(timings) == 7);
  const auto json = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(json["groups"].size() == 6);
  CHECK(std::filesystem::exists(dir / "cycle_timings.csv"));

  // Numbers carry at least 9 significant digits.
  std::istringstream rows(summary);
  std::string line;
  std::getline(rows, line);
  std::getline(rows, line);
  const auto energy_field = [&] {
    std::string f;
    std::istringstream fs(line);
    for (int i = 0; i < 6; ++i) std::getline(fs, f, ',');
    return f;
  }();
  CHECK(std::stod(energy_field) == report.runs[0].log.summary.total_energy);

  CHECK_THROWS_AS(emit_outputs(report, "/proc/eaae_forbidden"), std::runtime_error);
  req.runs = 0;
  CHECK_THROWS_AS(run_benchmark(req), std::invalid_argument);
}
