#pragma once

#include "eaae/frontier.hpp"
#include "eaae/planning.hpp"
#include "eaae/vehicle.hpp"

namespace eaae {

/// Per-rotor electrical power as a polynomial in rotor speed:
/// P(w) = c1 w + c3 w^3 + c6 w^6.
struct PowerModel {
  double c1 = 6.088e-3;
  double c3 = 1.875e-8;
  double c6 = 7.700e-20;

  void validate() const;
};

double rotor_power(const PowerModel& model, double omega);

struct EnergyReport {
  double total_energy = 0.0;  // J
  double mean_power = 0.0;    // W
  double duration = 0.0;      // s
  Vec4 per_rotor_energy = Vec4::Zero();
};

/// Sum over rotors of the trapezoidal integral of rotor power on the trace's
/// record grid. TooShort for fewer than two samples.
Expected<EnergyReport> trajectory_energy(const PowerModel& model, const RolloutTrace& trace);

struct CandidateConfig {
  PlannerConfig planner;
  QuadParams quad;
  ControllerGains gains;
  RolloutConfig rollout;
  PowerModel power;
};

/// Wall-clock time spent per pipeline stage, milliseconds.
struct StageTimings {
  double clustering_ms = 0.0;
  double trajectory_ms = 0.0;
  double energy_ms = 0.0;
};

struct CandidateEstimate {
  TimedTrajectory trajectory;
  RolloutTrace trace;
  EnergyReport report;
};

/// Plans to the viewpoint, flies the plan in closed loop from the current
/// state and integrates rotor power. Failures: Unreachable, Clearance,
/// Diverged.
Expected<CandidateEstimate> estimate_candidate(const VoxelMap& map, const RigidState& current,
                                               const Viewpoint& viewpoint, const CandidateConfig& config,
                                               StageTimings* timings = nullptr);

/// Rollout + energy of an already planned trajectory.
Expected<CandidateEstimate> evaluate_trajectory(TimedTrajectory trajectory, const RigidState& current,
                                                const CandidateConfig& config, StageTimings* timings = nullptr);

}  // namespace eaae
