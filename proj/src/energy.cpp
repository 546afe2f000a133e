#include "eaae/energy.hpp"

#include <chrono>
#include <stdexcept>

namespace eaae {

void PowerModel::validate() const {
  if (c1 < 0.0 || c3 < 0.0 || c6 < 0.0) throw std::invalid_argument("power model coefficients must be nonnegative");
}

double rotor_power(const PowerModel& m, double omega) {
  const double w3 = omega * omega * omega;
  return m.c1 * omega + m.c3 * w3 + m.c6 * w3 * w3;
}

Expected<EnergyReport> trajectory_energy(const PowerModel& model, const RolloutTrace& trace) {
  if (trace.rotor_speeds.size() < 2)
    return Failure{FailureKind::TooShort, "trace has " + std::to_string(trace.rotor_speeds.size()) + " samples"};
  EnergyReport r;
  const double h = trace.dt_record;
  Vec4 prev;
  for (int i = 0; i < 4; ++i) prev[i] = rotor_power(model, trace.rotor_speeds.front()[i]);
  for (std::size_t s = 1; s < trace.rotor_speeds.size(); ++s) {
    Vec4 cur;
    for (int i = 0; i < 4; ++i) cur[i] = rotor_power(model, trace.rotor_speeds[s][i]);
    r.per_rotor_energy += 0.5 * h * (prev + cur);
    prev = cur;
  }
  r.duration = double(trace.rotor_speeds.size() - 1) * h;
  r.total_energy = r.per_rotor_energy.sum();
  r.mean_power = r.total_energy / r.duration;
  return r;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

Expected<CandidateEstimate> evaluate_trajectory(TimedTrajectory trajectory, const RigidState& current,
                                                const CandidateConfig& config, StageTimings* timings) {
  const auto t0 = std::chrono::steady_clock::now();
  auto trace = rollout(trajectory, current, config.quad, config.gains, config.rollout);
  Expected<CandidateEstimate> out = Failure{FailureKind::Diverged, ""};
  if (!trace) {
    out = trace.error();
  } else if (auto report = trajectory_energy(config.power, *trace); !report) {
    out = report.error();
  } else {
    out = CandidateEstimate{std::move(trajectory), std::move(trace).value(), report.value()};
  }
  if (timings) timings->energy_ms += elapsed_ms(t0);
  return out;
}

Expected<CandidateEstimate> estimate_candidate(const VoxelMap& map, const RigidState& current,
                                               const Viewpoint& viewpoint, const CandidateConfig& config,
                                               StageTimings* timings) {
  const auto t0 = std::chrono::steady_clock::now();
  auto traj = plan_trajectory(map, current.position, yaw_of(current.attitude), viewpoint.position, viewpoint.yaw,
                              config.planner);
  if (timings) timings->trajectory_ms += elapsed_ms(t0);
  if (!traj) return traj.error();
  return evaluate_trajectory(std::move(traj).value(), current, config, timings);
}

}  // namespace eaae
