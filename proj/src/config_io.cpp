#include "eaae/config_io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace eaae {

using nlohmann::json;

namespace {

// Reads declared keys of one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw std::invalid_argument("config: '" + name_ + "' must be an object");
  }
  /// Rejects keys that no get/sub call asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw std::invalid_argument("config: unknown key '" + (name_.empty() ? "" : name_ + ".") + it.key() + "'");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: '" + name_ + "." + key + "' has the wrong type");
    }
  }

  void get(const char* key, Vec3& out) {
    std::vector<double> v;
    get(key, v);
    if (seen_.count(key) && j_.contains(key)) {
      if (v.size() != 3) throw std::invalid_argument("config: '" + name_ + "." + key + "' needs 3 numbers");
      out = Vec3(v[0], v[1], v[2]);
    }
  }

  /// Runs `read` on the nested object `key`, if present.
  template <class F>
  void sub(const char* key, F&& read) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    Section s(*it, name_.empty() ? key : name_ + "." + key);
    read(s);
    s.finish();
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_limits(Section& s, MotionLimits& l) {
  s.get("v_max", l.v_max);
  s.get("a_max", l.a_max);
  s.get("yaw_rate_max", l.yaw_rate_max);
  s.get("corner_round", l.corner_round);
}

}  // namespace

void apply_config_json(MissionConfig& c, std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  Section root(j, "");
  auto& cand = c.policy_config.candidate;
  root.sub("sensor", [&](Section& s) {
    s.get("h_px", c.sensor.h_px);
    s.get("v_px", c.sensor.v_px);
    s.get("fov_h", c.sensor.fov_h);
    s.get("fov_v", c.sensor.fov_v);
    s.get("d_min", c.sensor.d_min);
    s.get("d_max", c.sensor.d_max);
    s.get("rate_hz", c.sensor.rate_hz);
  });
  root.sub("occupancy", [&](Section& s) {
    s.get("p_hit", c.occupancy.p_hit);
    s.get("p_miss", c.occupancy.p_miss);
    s.get("p_min", c.occupancy.p_min);
    s.get("p_max", c.occupancy.p_max);
    s.get("p_occ", c.occupancy.p_occ);
  });
  root.sub("mapping", [&](Section& s) { s.get("resolution", c.resolution); });
  root.sub("frontier", [&](Section& s) { s.get("cluster_clearance", c.cluster_clearance); });
  root.sub("viewpoints", [&](Section& s) {
    auto& v = c.policy_config.viewpoints;
    s.get("d_view", v.d_view);
    s.get("n_azimuth", v.n_azimuth);
    s.get("z_min", v.z_min);
    s.get("z_max", v.z_max);
    s.get("clearance", v.clearance);
  });
  root.sub("planner", [&](Section& s) {
    auto& p = cand.planner;
    s.get("clearance", p.clearance);
    s.get("collision_clearance", p.collision_clearance);
    s.get("d_grace", p.d_grace);
    s.get("dt", p.dt);
    s.sub("limits", [&](Section& l) { read_limits(l, p.limits); });
  });
  root.sub("limits", [&](Section& s) { read_limits(s, cand.planner.limits); });
  root.sub("quad", [&](Section& s) {
    auto& q = cand.quad;
    s.get("mass", q.mass);
    s.get("inertia_diag", q.inertia_diag);
    s.get("arm_length", q.arm_length);
    s.get("c_t", q.c_t);
    s.get("c_q_over_c_t", q.c_q_over_c_t);
    s.get("omega_min", q.omega_min);
    s.get("omega_max", q.omega_max);
    s.get("rotor_count", q.rotor_count);
  });
  root.sub("gains", [&](Section& s) {
    s.get("kp", cand.gains.kp);
    s.get("kv", cand.gains.kv);
    s.get("k_r", cand.gains.k_r);
    s.get("k_omega", cand.gains.k_omega);
  });
  root.sub("rollout", [&](Section& s) {
    auto& r = cand.rollout;
    s.get("control_hz", r.control_hz);
    s.get("substeps", r.substeps);
    s.get("record_dt", r.record_dt);
    s.get("settle_window", r.settle_window);
    s.get("settle_tolerance", r.settle_tolerance);
    s.get("divergence_limit", r.divergence_limit);
  });
  root.sub("power", [&](Section& s) {
    s.get("c1", cand.power.c1);
    s.get("c3", cand.power.c3);
    s.get("c6", cand.power.c6);
  });
  root.sub("policy", [&](Section& s) {
    s.get("top_k", c.policy_config.top_k);
    s.get("viewpoints_per_cluster", c.policy_config.viewpoints_per_cluster);
    s.get("max_viewpoint_attempts", c.policy_config.max_viewpoint_attempts);
  });
  root.sub("termination", [&](Section& s) {
    s.get("max_sim_time", c.termination.max_sim_time);
    s.get("coverage_target", c.termination.coverage_target);
    s.get("max_cycles", c.termination.max_cycles);
  });
  root.sub("observability", [&](Section& s) {
    s.get("grid_step", c.observability.grid_step);
    s.get("heights", c.observability.heights);
    s.get("n_yaw", c.observability.n_yaw);
    s.get("clearance", c.observability.clearance);
  });
  root.sub("mission", [&](Section& s) {
    s.get("halt_hold", c.halt_hold);
    s.get("series_dt", c.series_dt);
    s.get("blacklist_fraction", c.blacklist_fraction);
    s.get("randomize_start_yaw", c.randomize_start_yaw);
  });
  root.finish();
}

void apply_config_file(MissionConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    apply_config_json(config, ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const MissionConfig& c) {
  const auto& cand = c.policy_config.candidate;
  const auto& l = cand.planner.limits;
  const auto& q = cand.quad;
  const auto& r = cand.rollout;
  const auto& v = c.policy_config.viewpoints;
  json j = {
      {"sensor",
       {{"h_px", c.sensor.h_px}, {"v_px", c.sensor.v_px}, {"fov_h", c.sensor.fov_h}, {"fov_v", c.sensor.fov_v},
        {"d_min", c.sensor.d_min}, {"d_max", c.sensor.d_max}, {"rate_hz", c.sensor.rate_hz}}},
      {"occupancy",
       {{"p_hit", c.occupancy.p_hit}, {"p_miss", c.occupancy.p_miss}, {"p_min", c.occupancy.p_min},
        {"p_max", c.occupancy.p_max}, {"p_occ", c.occupancy.p_occ}}},
      {"mapping", {{"resolution", c.resolution}}},
      {"frontier", {{"cluster_clearance", c.cluster_clearance}}},
      {"viewpoints",
       {{"d_view", v.d_view}, {"n_azimuth", v.n_azimuth}, {"z_min", v.z_min}, {"z_max", v.z_max},
        {"clearance", v.clearance}}},
      {"planner",
       {{"clearance", cand.planner.clearance},
        {"collision_clearance", cand.planner.collision_clearance},
        {"d_grace", cand.planner.d_grace},
        {"dt", cand.planner.dt},
        {"limits",
         {{"v_max", l.v_max}, {"a_max", l.a_max}, {"yaw_rate_max", l.yaw_rate_max},
          {"corner_round", l.corner_round}}}}},
      {"quad",
       {{"mass", q.mass}, {"inertia_diag", {q.inertia_diag.x(), q.inertia_diag.y(), q.inertia_diag.z()}},
        {"arm_length", q.arm_length}, {"c_t", q.c_t}, {"c_q_over_c_t", q.c_q_over_c_t},
        {"omega_min", q.omega_min}, {"omega_max", q.omega_max}, {"rotor_count", q.rotor_count}}},
      {"gains",
       {{"kp", cand.gains.kp}, {"kv", cand.gains.kv}, {"k_r", cand.gains.k_r}, {"k_omega", cand.gains.k_omega}}},
      {"rollout",
       {{"control_hz", r.control_hz}, {"substeps", r.substeps}, {"record_dt", r.record_dt},
        {"settle_window", r.settle_window}, {"settle_tolerance", r.settle_tolerance},
        {"divergence_limit", r.divergence_limit}}},
      {"power", {{"c1", cand.power.c1}, {"c3", cand.power.c3}, {"c6", cand.power.c6}}},
      {"policy",
       {{"top_k", c.policy_config.top_k},
        {"viewpoints_per_cluster", c.policy_config.viewpoints_per_cluster},
        {"max_viewpoint_attempts", c.policy_config.max_viewpoint_attempts}}},
      {"termination",
       {{"max_sim_time", c.termination.max_sim_time}, {"coverage_target", c.termination.coverage_target},
        {"max_cycles", c.termination.max_cycles}}},
      {"observability",
       {{"grid_step", c.observability.grid_step}, {"heights", c.observability.heights},
        {"n_yaw", c.observability.n_yaw}, {"clearance", c.observability.clearance}}},
      {"mission",
       {{"halt_hold", c.halt_hold}, {"series_dt", c.series_dt}, {"blacklist_fraction", c.blacklist_fraction},
        {"randomize_start_yaw", c.randomize_start_yaw}}},
  };
  return j.dump(2) + "\n";
}

}  // namespace eaae
