#pragma once

#include "eaae/policy.hpp"
#include "eaae/world.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace eaae {

struct TerminationConfig {
  double max_sim_time = 1200.0;  // s
  double coverage_target = 0.98;
  int max_cycles = 500;
};

/// Pose grid for the observable-volume oracle.
struct ObservabilityConfig {
  double grid_step = 1.5;
  std::vector<double> heights{0.75, 1.5};
  int n_yaw = 8;
  /// Poses closer than this to ground-truth geometry are skipped.
  double clearance = 0.4;
};

struct MissionConfig {
  Scenario scenario;
  PolicyKind policy = PolicyKind::Eaae;
  std::uint64_t seed = 0;
  SensorConfig sensor;
  OccupancyParams occupancy;
  double resolution = 0.1;
  /// Clusters with an occupied voxel centre this close to the centroid are
  /// dropped.
  double cluster_clearance = 0.4;
  PolicyConfig policy_config;
  TerminationConfig termination;
  ObservabilityConfig observability;
  /// Hover after a halted leg, s.
  double halt_hold = 0.5;
  /// Sim-time spacing of progress samples, s.
  double series_dt = 1.0;
  /// A reached cluster whose members are still at least this fraction
  /// frontier is excluded from later cycles.
  double blacklist_fraction = 0.5;
  /// The seed draws the start yaw uniformly from [-pi, pi) on top of the
  /// scenario's start yaw.
  bool randomize_start_yaw = true;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Frontier cluster radius bound from the sensor frustum.
  double cluster_radius_limit() const { return std::tan(0.5 * sensor.fov_h) * sensor.d_max; }
};

enum class Termination { NoTarget, Coverage, MaxSimTime, MaxCycles };
const char* to_string(Termination t);

/// Progress sample. Serialized one-to-one as series_<run>.csv.
struct SeriesPoint {
  double t = 0.0;                  // s
  double explored_fraction = 0.0;  // of oracle-observable free volume
  double cum_energy = 0.0;         // J
  double entropy = 0.0;            // bits/cell
  bool operator==(const SeriesPoint&) const = default;
};

struct CycleRecord {
  int cycle = 0;
  double t_start = 0.0;
  PartitionCounts counts;  // after the decision scan
  bool partition_ok = true;
  std::size_t n_frontiers = 0;
  std::size_t n_clusters = 0;
  std::size_t n_feasible = 0;
  double max_cluster_radius = 0.0;
  int target_cluster = -1;
  int info_gain = 0;
  std::optional<double> predicted_energy;
  double leg_energy = 0.0;    // J, flown trajectory
  double hover_energy = 0.0;  // J, braking and decision hover
  double leg_duration = 0.0;  // s
  bool halted = false;
  std::string failure;  // execution failure, if any
  StageTimings timings;
  std::vector<CandidateRecord> candidates;
};

struct MissionSummary {
  double completion_time = 0.0;  // s
  double total_energy = 0.0;     // J
  double mean_power = 0.0;       // W
  double final_entropy = 0.0;    // bits/cell
  double explored_fraction = 0.0;
  Termination termination = Termination::NoTarget;
  int cycles = 0;
};

struct MissionLog {
  std::string scenario;
  PolicyKind policy = PolicyKind::Eaae;
  std::uint64_t seed = 0;
  std::vector<CycleRecord> cycles;
  std::vector<SeriesPoint> series;
  MissionSummary summary;
  std::size_t observable_voxels = 0;
};

MissionLog run_mission(const MissionConfig& config);

// ---- observability oracle ----

/// Ground-truth free voxels that some sensor pose on the oracle grid
/// observes.
struct ObservableSet {
  MapGeometry geometry;
  std::vector<std::uint32_t> indices;
};

/// Cached per (scenario, sensor, resolution, grid); thread-safe.
std::shared_ptr<const ObservableSet> observable_free_set(const Scenario& scenario, const SensorConfig& sensor,
                                                         const OccupancyParams& occupancy, double resolution,
                                                         const ObservabilityConfig& config);

double explored_fraction(const VoxelMap& map, const ObservableSet& set);

// ---- benchmark ----

struct MetricStats {
  double median = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

MetricStats compute_stats(std::vector<double> values);

struct RunResult {
  int run = 0;        // global index, names series_<run>.csv
  int run_index = 0;  // within its (scenario, policy) group
  MissionLog log;
};

struct GroupReport {
  std::string scenario;
  PolicyKind policy = PolicyKind::Eaae;
  std::vector<int> runs;
  MetricStats completion_time, total_energy, mean_power, final_entropy, explored_fraction;
  StageTimings mean_timings;  // per cycle, ms
};

struct BenchmarkReport {
  std::vector<RunResult> runs;
  std::vector<GroupReport> groups;
};

struct BenchmarkRequest {
  std::vector<Scenario> scenarios;
  std::vector<PolicyKind> policies;
  int runs = 1;
  std::uint64_t base_seed = 0;
  /// Scenario, policy and seed are overwritten per mission.
  MissionConfig base;
  /// Concurrent missions; 0 picks the hardware concurrency.
  int jobs = 0;
};

/// Missions are ordered scenario-major, then policy, then run index;
/// seeds are base_seed + run index. `on_run` is called (serialized) as each
/// mission finishes.
BenchmarkReport run_benchmark(const BenchmarkRequest& request,
                              const std::function<void(const RunResult&)>& on_run = {});

GroupReport aggregate_group(const std::vector<const RunResult*>& runs);

// ---- outputs ----

inline const char* kSummaryHeader =
    "run,scenario,policy,seed,completion_s,energy_J,mean_power_W,entropy_bits,termination,explored_fraction,cycles";
inline const char* kSeriesHeader = "t_s,explored_fraction,cum_energy_J,entropy_bits";

std::string summary_row(const RunResult& run);
std::string series_csv(const std::vector<SeriesPoint>& series);
std::vector<SeriesPoint> parse_series_csv(const std::string& text);
std::vector<SeriesPoint> read_series_file(const std::filesystem::path& path);
std::string cycle_timings_csv(const std::vector<RunResult>& runs);
std::string timings_csv(const BenchmarkReport& report);
std::string report_json(const BenchmarkReport& report);

/// Writes summary.csv, series_<run>.csv, timings.csv, cycle_timings.csv and
/// report.json. Throws std::runtime_error carrying the path on I/O failure.
void emit_outputs(const BenchmarkReport& report, const std::filesystem::path& out_dir);
/// Writes one text file, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace eaae
