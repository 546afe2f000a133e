#pragma once

#include "eaae/energy.hpp"
#include "eaae/frontier.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eaae {

enum class PolicyKind { Eaae, Nearest, ClassicFrontier };

const char* to_string(PolicyKind kind);
/// Accepts "eaae", "nearest", "classic".
PolicyKind parse_policy(std::string_view name);
std::vector<PolicyKind> all_policies();

/// One candidate considered during selection.
struct CandidateRecord {
  int cluster_id = 0;
  int info_gain = 0;
  double centroid_distance = 0.0;
  std::optional<Viewpoint> viewpoint;
  std::optional<double> energy;  // EAAE only
  std::string failure;           // empty on success
};

struct Decision {
  Viewpoint viewpoint;
  TimedTrajectory trajectory;
  std::optional<RolloutTrace> trace;  // EAAE reuses its offline rollout
  std::optional<double> predicted_energy;
  int cluster_id = 0;
  int info_gain = 0;
  double centroid_distance = 0.0;
  std::vector<CandidateRecord> evaluated;
};

struct PolicyConfig {
  int top_k = 3;
  /// Planned viewpoints per cluster whose energy EAAE evaluates.
  int viewpoints_per_cluster = 1;
  /// Ring viewpoints tried per cluster before the cluster is skipped.
  int max_viewpoint_attempts = 3;
  ViewpointConfig viewpoints;
  CandidateConfig candidate;
};

/// Picks the next goal among feasibility-filtered clusters.
///  - EAAE: among the top-K clusters by gain, the candidate with minimum
///    predicted energy (ties: lower cluster id); if none of them is
///    feasible the next K by gain are tried.
///  - Nearest: first cluster, by centroid distance, with a plannable
///    viewpoint.
///  - ClassicFrontier: first cluster, by descending count, with a plannable
///    viewpoint.
/// nullopt means no target (no cluster yields a feasible candidate).
std::optional<Decision> select_target(PolicyKind kind, const std::vector<FrontierCluster>& clusters,
                                      const RigidState& state, const VoxelMap& map, const PolicyConfig& config,
                                      StageTimings* timings = nullptr,
                                      std::vector<CandidateRecord>* evaluated_out = nullptr);

}  // namespace eaae
