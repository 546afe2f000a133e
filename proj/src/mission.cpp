#include "eaae/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <set>

namespace eaae {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::NoTarget: return "no_target";
    case Termination::Coverage: return "coverage";
    case Termination::MaxSimTime: return "max_sim_time";
    case Termination::MaxCycles: return "max_cycles";
  }
  return "?";
}

void MissionConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid mission config: ") + what);
  };
  eaae::validate(scenario);
  require(sensor.h_px >= 2 && sensor.v_px >= 2, "sensor.h_px and sensor.v_px must be >= 2");
  require(sensor.fov_h > 0.0 && sensor.fov_h < kPi && sensor.fov_v > 0.0 && sensor.fov_v < kPi,
          "sensor fov must lie in (0, pi)");
  require(sensor.d_min >= 0.0 && sensor.d_min < sensor.d_max, "need 0 <= sensor.d_min < sensor.d_max");
  require(sensor.rate_hz > 0.0, "sensor.rate_hz must be positive");
  require(resolution > 0.0, "resolution must be positive");
  require(occupancy.p_min > 0.0 && occupancy.p_min < occupancy.p_miss && occupancy.p_miss < 0.5 &&
              occupancy.p_hit > 0.5 && occupancy.p_hit < occupancy.p_max && occupancy.p_max < 1.0 &&
              occupancy.p_occ > occupancy.p_min && occupancy.p_occ < occupancy.p_max,
          "occupancy needs 0 < p_min < p_miss < 0.5 < p_hit < p_max < 1 and p_min < p_occ < p_max");
  require(cluster_clearance >= 0.0, "cluster_clearance must be nonnegative");
  require(policy_config.top_k >= 1, "policy.top_k must be >= 1");
  require(policy_config.viewpoints_per_cluster >= 1, "policy.viewpoints_per_cluster must be >= 1");
  require(policy_config.max_viewpoint_attempts >= 1, "policy.max_viewpoint_attempts must be >= 1");
  const auto& vp = policy_config.viewpoints;
  require(vp.d_view > 0.0 && vp.n_azimuth >= 1 && vp.z_min <= vp.z_max && vp.clearance >= 0.0,
          "viewpoints need d_view > 0, n_azimuth >= 1, z_min <= z_max, clearance >= 0");
  const auto& pl = policy_config.candidate.planner;
  require(pl.clearance >= 0.0 && pl.collision_clearance >= 0.0 && pl.d_grace >= 0.0 && pl.dt > 0.0,
          "planner clearances must be nonnegative and dt positive");
  require(pl.limits.v_max > 0.0 && pl.limits.a_max > 0.0 && pl.limits.yaw_rate_max > 0.0 &&
              pl.limits.corner_round >= 0.0,
          "limits need positive v_max, a_max, yaw_rate_max and nonnegative corner_round");
  policy_config.candidate.quad.validate();
  policy_config.candidate.power.validate();
  const auto& g = policy_config.candidate.gains;
  require(g.kp > 0.0 && g.kv > 0.0 && g.k_r > 0.0 && g.k_omega > 0.0, "controller gains must be positive");
  const auto& ro = policy_config.candidate.rollout;
  require(ro.control_hz > 0.0 && ro.substeps >= 1 && ro.record_dt > 0.0 && ro.settle_window >= 0.0 &&
              ro.settle_tolerance > 0.0 && ro.divergence_limit > 0.0,
          "rollout parameters must be positive");
  require(termination.max_sim_time > 0.0, "termination.max_sim_time must be positive");
  require(termination.coverage_target > 0.0 && termination.coverage_target <= 1.0,
          "termination.coverage_target must lie in (0, 1]");
  require(termination.max_cycles >= 0, "termination.max_cycles must be >= 0");
  require(observability.grid_step > 0.0 && observability.n_yaw >= 1 && !observability.heights.empty(),
          "observability needs grid_step > 0, n_yaw >= 1 and at least one height");
  require(halt_hold >= 0.0, "halt_hold must be nonnegative");
  require(series_dt > 0.0, "series_dt must be positive");
  require(blacklist_fraction > 0.0 && blacklist_fraction <= 1.0, "blacklist_fraction must lie in (0, 1]");
}

namespace {

// Reference that leaves `traj` at time t0 and brakes along its remaining
// path at a_max, then holds the stop point for `hold` seconds.
TimedTrajectory braking_reference(const TimedTrajectory& traj, double t0, double a_max, double hold) {
  const double dt = traj.dt;
  const TrajectorySample start = traj.at(t0);
  std::vector<Vec3> pts{start.position};
  for (const auto& s : traj.samples)
    if (s.t > t0 && (s.position - pts.back()).norm() > 1e-9) pts.push_back(s.position);
  std::vector<double> arc{0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) arc.push_back(arc.back() + (pts[i] - pts[i - 1]).norm());

  auto locate = [&](double s, Vec3& dir) {
    if (pts.size() == 1 || s >= arc.back()) {
      dir = pts.size() > 1 ? Vec3((pts.back() - pts[pts.size() - 2]).normalized()) : Vec3::Zero();
      return pts.back();
    }
    const std::size_t i = std::size_t(std::upper_bound(arc.begin(), arc.end(), s) - arc.begin()) - 1;
    dir = (pts[i + 1] - pts[i]).normalized();
    return Vec3(pts[i] + dir * (s - arc[i]));
  };

  const double v0 = start.velocity.norm();
  const double t_stop = v0 / a_max;
  const int n = int(std::ceil((t_stop + hold) / dt - 1e-9));
  TimedTrajectory out;
  out.dt = dt;
  for (int k = 0; k <= std::max(n, 1); ++k) {
    const double t = k * dt;
    TrajectorySample s;
    s.t = t;
    s.yaw = start.yaw;
    const double tb = std::min(t, t_stop);
    const double dist = std::min(v0 * tb - 0.5 * a_max * tb * tb, arc.back());
    Vec3 dir;
    s.position = locate(dist, dir);
    if (t < t_stop && dist < arc.back()) {
      s.velocity = dir * (v0 - a_max * t);
      s.acceleration = -a_max * dir;
    }
    out.samples.push_back(s);
  }
  return out;
}

TimedTrajectory hold_reference(const Vec3& p, double yaw, double duration, double dt) {
  TimedTrajectory out;
  out.dt = dt;
  const int n = std::max(1, int(std::ceil(duration / dt - 1e-9)));
  for (int k = 0; k <= n; ++k) {
    TrajectorySample s;
    s.t = k * dt;
    s.position = p;
    s.yaw = yaw;
    out.samples.push_back(s);
  }
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

class Mission {
 public:
  explicit Mission(const MissionConfig& config)
      : cfg_(config),
        planner_(config.policy_config.candidate.planner),
        map_(MapGeometry::covering(config.scenario.bounds, config.resolution), config.occupancy,
             inflation_radii(config)),
        oracle_(observable_free_set(config.scenario, config.sensor, config.occupancy, config.resolution,
                                    config.observability)),
        blacklist_(map_.geometry().size(), 0) {
    std::mt19937_64 rng(config.seed);
    double yaw = config.scenario.start.yaw;
    if (config.randomize_start_yaw) yaw += std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    state_ = RigidState::at_rest(config.scenario.start.position, wrap_angle(yaw));
    log_.scenario = config.scenario.name;
    log_.policy = config.policy;
    log_.seed = config.seed;
    log_.observable_voxels = oracle_->indices.size();
  }

  MissionLog run() {
    scan();
    record_series(true);
    Termination reason = Termination::NoTarget;
    for (int cycle = 0;; ++cycle) {
      if (cycle >= cfg_.termination.max_cycles) {
        reason = Termination::MaxCycles;
        break;
      }
      if (explored() >= cfg_.termination.coverage_target) {
        reason = Termination::Coverage;
        break;
      }
      if (t_ >= cfg_.termination.max_sim_time) {
        reason = Termination::MaxSimTime;
        break;
      }
      if (!run_cycle(cycle)) {
        reason = Termination::NoTarget;
        break;
      }
    }
    finish(reason);
    return std::move(log_);
  }

 private:
  static std::vector<double> inflation_radii(const MissionConfig& c) {
    std::set<double> radii{c.policy_config.candidate.planner.clearance,
                           c.policy_config.candidate.planner.collision_clearance,
                           c.policy_config.viewpoints.clearance};
    return {radii.begin(), radii.end()};
  }

  void scan() {
    map_.integrate_scan(render_depth_scan(cfg_.scenario, state_.position, state_.attitude, cfg_.sensor));
    explored_dirty_ = true;
  }

  double explored() {
    if (explored_dirty_) explored_ = explored_fraction(map_, *oracle_);
    explored_dirty_ = false;
    return explored_;
  }

  void record_series(bool force) {
    if (!force && t_ < next_series_ - 1e-9) return;
    if (!log_.series.empty() && log_.series.back().t == t_) log_.series.pop_back();
    log_.series.push_back({t_, explored(), energy_, map_.entropy()});
    while (next_series_ <= t_ + 1e-9) next_series_ += cfg_.series_dt;
  }

  bool still_frontier(const VoxelKey& key) const {
    if (!map_.is_free(key)) return false;
    for (const auto& n : map_.neighbors6(key))
      if (map_.is_unknown(n)) return true;
    return false;
  }

  // Flies `trace` from its first sample, scanning at the sensor rate and
  // advancing sim time and energy. With a trajectory, each scan is followed
  // by a collision check of the remaining reference; returns the index at
  // which that check fired, if any.
  std::optional<std::size_t> fly(const RolloutTrace& trace, const TimedTrajectory* reference, double& energy_out) {
    const auto& power = cfg_.policy_config.candidate.power;
    const double dt = trace.dt_record;
    const double scan_period = 1.0 / cfg_.sensor.rate_hz;
    const CollisionCheck check{planner_.collision_clearance, planner_.d_grace, planner_.clearance};
    auto total_power = [&](std::size_t i) {
      double p = 0.0;
      for (int r = 0; r < 4; ++r) p += rotor_power(power, trace.rotor_speeds[i][r]);
      return p;
    };
    const double t0 = t_;
    double next_scan = scan_period;
    double p_prev = total_power(0);
    double leg_energy = 0.0;
    std::optional<std::size_t> halted;
    for (std::size_t i = 1; i < trace.size(); ++i) {
      const double p = total_power(i);
      leg_energy += 0.5 * dt * (p_prev + p);
      p_prev = p;
      const double local = double(i) * dt;
      t_ = t0 + local;
      energy_ = energy_base_ + leg_energy;
      state_ = trace.states[i];
      if (local >= next_scan - 1e-9) {
        scan();
        while (next_scan <= local + 1e-9) next_scan += scan_period;
        if (reference && local < reference->duration()) {
          const auto from = std::size_t(std::lround(local / reference->dt));
          if (first_collision(*reference, map_, check, from)) halted = i;
        }
      }
      record_series(false);
      if (halted) break;
    }
    energy_base_ += leg_energy;
    energy_ = energy_base_;
    energy_out += leg_energy;
    return halted;
  }

  // Hold at the current position for one sensor period, then scan.
  void decision_hover(CycleRecord& rec) {
    const auto& cand = cfg_.policy_config.candidate;
    const auto ref = hold_reference(state_.position, yaw_of(state_.attitude), 1.0 / cfg_.sensor.rate_hz,
                                    cand.rollout.record_dt);
    auto trace = rollout(ref, state_, cand.quad, cand.gains, cand.rollout);
    if (!trace) {
      rec.failure = trace.error().describe();
      return;
    }
    fly(*trace, nullptr, rec.hover_energy);
    scan();
  }

  bool run_cycle(int cycle) {
    CycleRecord rec;
    rec.cycle = cycle;
    rec.t_start = t_;
    rec.counts = map_.partition_counts();
    rec.partition_ok = rec.counts == map_.recount() &&
                       rec.counts.n_free + rec.counts.n_occupied + rec.counts.n_unknown == rec.counts.n_total;

    const auto t_cluster = std::chrono::steady_clock::now();
    FrontierSet frontiers = detect_frontiers(map_);
    const auto& g = map_.geometry();
    std::erase_if(frontiers, [&](const VoxelKey& k) { return blacklist_[g.index(k)] != 0; });
    const auto clusters = cluster_frontiers(frontiers, g, cfg_.cluster_radius_limit(), cfg_.seed + std::uint64_t(cycle));
    const auto feasible = filter_feasible(clusters, map_, cfg_.cluster_clearance);
    rec.timings.clustering_ms = elapsed_ms(t_cluster);
    rec.n_frontiers = frontiers.size();
    rec.n_clusters = clusters.size();
    rec.n_feasible = feasible.size();
    for (const auto& c : clusters) rec.max_cluster_radius = std::max(rec.max_cluster_radius, c.radius);

    auto decision = select_target(cfg_.policy, feasible, state_, map_, cfg_.policy_config, &rec.timings, &rec.candidates);
    if (!decision) {
      log_.cycles.push_back(rec);
      return false;
    }
    rec.target_cluster = decision->cluster_id;
    rec.info_gain = decision->info_gain;
    rec.predicted_energy = decision->predicted_energy;

    const auto& cand = cfg_.policy_config.candidate;
    const FrontierCluster* target = nullptr;
    for (const auto& c : feasible)
      if (c.id == decision->cluster_id) target = &c;

    Expected<RolloutTrace> trace = Failure{FailureKind::Diverged, ""};
    if (decision->trace)
      trace = std::move(*decision->trace);
    else
      trace = rollout(decision->trajectory, state_, cand.quad, cand.gains, cand.rollout);

    const double leg_start = t_;
    if (!trace) {
      // The leg cannot be flown; exclude the cluster and decide again.
      rec.failure = trace.error().describe();
      for (const auto& k : target->members) blacklist_[g.index(k)] = 1;
    } else {
      const auto halt = fly(*trace, &decision->trajectory, rec.leg_energy);
      rec.leg_duration = t_ - leg_start;
      if (halt) {
        rec.halted = true;
        const auto brake = braking_reference(decision->trajectory, double(*halt) * trace->dt_record,
                                             cand.planner.limits.a_max, cfg_.halt_hold);
        auto brake_trace = rollout(brake, state_, cand.quad, cand.gains, cand.rollout);
        if (brake_trace)
          fly(*brake_trace, nullptr, rec.hover_energy);
        else
          rec.failure = brake_trace.error().describe();
      } else {
        std::size_t remaining = 0;
        for (const auto& k : target->members)
          if (still_frontier(k)) ++remaining;
        if (double(remaining) >= cfg_.blacklist_fraction * double(target->members.size()))
          for (const auto& k : target->members) blacklist_[g.index(k)] = 1;
      }
    }
    decision_hover(rec);
    record_series(true);
    log_.cycles.push_back(rec);
    return true;
  }

  void finish(Termination reason) {
    record_series(true);
    auto& s = log_.summary;
    s.completion_time = t_;
    s.total_energy = energy_;
    s.mean_power = t_ > 0.0 ? energy_ / t_ : 0.0;
    s.final_entropy = log_.series.back().entropy;
    s.explored_fraction = explored();
    s.termination = reason;
    s.cycles = 0;
    for (const auto& c : log_.cycles)
      if (c.target_cluster >= 0) ++s.cycles;
  }

  const MissionConfig& cfg_;
  const PlannerConfig& planner_;
  VoxelMap map_;
  std::shared_ptr<const ObservableSet> oracle_;
  std::vector<std::uint8_t> blacklist_;
  RigidState state_;
  MissionLog log_;
  double t_ = 0.0;
  double energy_ = 0.0;
  double energy_base_ = 0.0;
  double explored_ = 0.0;
  bool explored_dirty_ = true;
  double next_series_ = 0.0;
};

}  // namespace

MissionLog run_mission(const MissionConfig& config) {
  config.validate();
  Mission mission(config);
  return mission.run();
}

}  // namespace eaae
