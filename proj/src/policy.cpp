#include "eaae/policy.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace eaae {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Eaae: return "eaae";
    case PolicyKind::Nearest: return "nearest";
    case PolicyKind::ClassicFrontier: return "classic";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view name) {
  if (name == "eaae") return PolicyKind::Eaae;
  if (name == "nearest") return PolicyKind::Nearest;
  if (name == "classic") return PolicyKind::ClassicFrontier;
  throw std::invalid_argument("unknown policy: " + std::string(name) + " (expected eaae, nearest or classic)");
}

std::vector<PolicyKind> all_policies() { return {PolicyKind::Eaae, PolicyKind::Nearest, PolicyKind::ClassicFrontier}; }

namespace {

struct PlannedViewpoint {
  Viewpoint viewpoint;
  TimedTrajectory trajectory;
};

// Plans ring viewpoints in order until `wanted` succeed or the attempt
// budget runs out. Failures are appended to `log`.
std::vector<PlannedViewpoint> plan_cluster(const FrontierCluster& cluster, const RigidState& state,
                                           const VoxelMap& map, const PolicyConfig& config, int wanted,
                                           StageTimings* timings, std::vector<CandidateRecord>& log) {
  const double distance = (cluster.centroid - state.position).norm();
  std::vector<PlannedViewpoint> planned;
  const auto t0 = std::chrono::steady_clock::now();
  const auto viewpoints = sample_viewpoints(cluster, map, config.viewpoints, state.position);
  if (viewpoints.empty()) log.push_back({cluster.id, cluster.count, distance, std::nullopt, std::nullopt,
                                         to_string(FailureKind::NoViewpoint)});
  int attempts = 0;
  for (const auto& vp : viewpoints) {
    if (int(planned.size()) >= wanted || attempts >= config.max_viewpoint_attempts) break;
    ++attempts;
    auto traj = plan_trajectory(map, state.position, yaw_of(state.attitude), vp.position, vp.yaw,
                                config.candidate.planner);
    if (traj)
      planned.push_back({vp, std::move(traj).value()});
    else
      log.push_back({cluster.id, cluster.count, distance, vp, std::nullopt, traj.error().describe()});
  }
  if (timings)
    timings->trajectory_ms +=
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return planned;
}

Decision make_decision(const FrontierCluster& c, const RigidState& state, PlannedViewpoint pv) {
  Decision d;
  d.viewpoint = pv.viewpoint;
  d.trajectory = std::move(pv.trajectory);
  d.cluster_id = c.id;
  d.info_gain = c.count;
  d.centroid_distance = (c.centroid - state.position).norm();
  return d;
}

std::optional<Decision> first_plannable(std::vector<FrontierCluster> ordered, const RigidState& state,
                                        const VoxelMap& map, const PolicyConfig& config, StageTimings* timings,
                                        std::vector<CandidateRecord>& log) {
  for (const auto& c : ordered) {
    auto planned = plan_cluster(c, state, map, config, 1, timings, log);
    if (planned.empty()) continue;
    log.push_back({c.id, c.count, (c.centroid - state.position).norm(), planned.front().viewpoint, std::nullopt, ""});
    return make_decision(c, state, std::move(planned.front()));
  }
  return std::nullopt;
}

std::optional<Decision> select_eaae(const std::vector<FrontierCluster>& clusters, const RigidState& state,
                                    const VoxelMap& map, const PolicyConfig& config, StageTimings* timings,
                                    std::vector<CandidateRecord>& log) {
  const auto ranked = top_k_by_gain(clusters, int(clusters.size()));
  const std::size_t k = std::size_t(std::max(1, config.top_k));
  for (std::size_t begin = 0; begin < ranked.size(); begin += k) {
    std::optional<Decision> best;
    double best_energy = 0.0;
    const std::size_t end = std::min(ranked.size(), begin + k);
    for (std::size_t r = begin; r < end; ++r) {
      const auto& c = ranked[r];
      const double distance = (c.centroid - state.position).norm();
      auto planned = plan_cluster(c, state, map, config, std::max(1, config.viewpoints_per_cluster), timings, log);
      for (auto& pv : planned) {
        auto est = evaluate_trajectory(pv.trajectory, state, config.candidate, timings);
        if (!est) {
          log.push_back({c.id, c.count, distance, pv.viewpoint, std::nullopt, est.error().describe()});
          continue;
        }
        const double e = est->report.total_energy;
        log.push_back({c.id, c.count, distance, pv.viewpoint, e, ""});
        const bool better = !best || e < best_energy || (e == best_energy && c.id < best->cluster_id);
        if (better) {
          best = make_decision(c, state, std::move(pv));
          best->trace = est->trace;
          best->predicted_energy = e;
          best_energy = e;
        }
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Decision> select_target(PolicyKind kind, const std::vector<FrontierCluster>& clusters,
                                      const RigidState& state, const VoxelMap& map, const PolicyConfig& config,
                                      StageTimings* timings, std::vector<CandidateRecord>* evaluated_out) {
  std::vector<CandidateRecord> log;
  std::optional<Decision> decision;
  switch (kind) {
    case PolicyKind::Eaae:
      decision = select_eaae(clusters, state, map, config, timings, log);
      break;
    case PolicyKind::Nearest: {
      auto ordered = clusters;
      std::stable_sort(ordered.begin(), ordered.end(), [&](const FrontierCluster& a, const FrontierCluster& b) {
        const double da = (a.centroid - state.position).norm();
        const double db = (b.centroid - state.position).norm();
        if (da != db) return da < db;
        return a.id < b.id;
      });
      decision = first_plannable(std::move(ordered), state, map, config, timings, log);
      break;
    }
    case PolicyKind::ClassicFrontier:
      decision = first_plannable(top_k_by_gain(clusters, int(clusters.size())), state, map, config, timings, log);
      break;
  }
  if (decision) decision->evaluated = log;
  if (evaluated_out) *evaluated_out = std::move(log);
  return decision;
}

}  // namespace eaae
