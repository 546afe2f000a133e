#pragma once

#include "eaae/planning.hpp"

#include <string>
#include <vector>

namespace eaae {

/// X-configuration quadrotor. Rotor i sits at 45 + 90*i degrees from body
/// +x (front-left, rear-left, rear-right, front-right); rotors 0 and 2 spin
/// counter-clockwise, 1 and 3 clockwise.
struct QuadParams {
  double mass = 0.752;
  Vec3 inertia_diag = Vec3(2.5e-3, 2.1e-3, 4.3e-3);
  double arm_length = 0.125;
  /// Calibrated so that hover draws 120 W under the default power model
  /// (hover rotor speed ~1075.61 rad/s).
  double c_t = 1.5941181384886294e-06;
  double c_q_over_c_t = 0.016;
  double omega_min = 150.0;
  double omega_max = 3000.0;
  int rotor_count = 4;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
  double hover_rotor_speed() const { return std::sqrt(mass * kGravity / (rotor_count * c_t)); }
};

struct ControllerGains {
  double kp = 6.0;
  double kv = 4.0;
  double k_r = 0.6;
  double k_omega = 0.12;
};

struct RigidState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Mat3 attitude = Mat3::Identity();  // body -> world
  Vec3 body_rates = Vec3::Zero();

  static RigidState at_rest(const Vec3& position, double yaw) {
    RigidState s;
    s.position = position;
    s.attitude = yaw_rotation(yaw);
    return s;
  }
};

struct ControlOutput {
  double thrust = 0.0;        // N, along body z
  Vec3 torque = Vec3::Zero();  // N m, body frame
};

/// Geometric tracking on SO(3): f_des = m(a_ref + g z) + Kp e_p + Kv e_v,
/// attitude from f_des and the reference yaw, tau = -K_R e_R - K_w e_w +
/// w x J w.
ControlOutput geometric_control(const RigidState& state, const TrajectorySample& ref, const QuadParams& params,
                                const ControllerGains& gains);

/// Forward mixer: per-rotor thrusts to (collective thrust, body torques).
ControlOutput mix(const Vec4& rotor_thrusts, const QuadParams& params);

/// Inverse mixer with saturation. When a rotor would leave its thrust range
/// the yaw torque is dropped first; remaining violations are clipped.
Vec4 allocate(double collective_thrust, const Vec3& torque, const QuadParams& params);

double rotor_speed_from_thrust(double thrust, const QuadParams& params);

/// Semi-implicit Euler step; attitude via the exponential map, then
/// re-orthonormalized.
RigidState step_dynamics(const RigidState& state, const Vec4& rotor_speeds, const QuadParams& params, double dt);

/// Time derivative used by step_dynamics (exposed for reference
/// integrators).
struct StateDerivative {
  Vec3 velocity;
  Vec3 acceleration;
  Vec3 angular_acceleration;
};
StateDerivative dynamics_derivative(const RigidState& state, const Vec4& rotor_speeds, const QuadParams& params);

struct RolloutConfig {
  double control_hz = 300.0;
  int substeps = 4;  // dynamics steps per control period (1.2 kHz)
  double record_dt = 0.02;
  double settle_window = 0.5;
  double settle_tolerance = 0.1;
  double divergence_limit = 2.0;
};

/// Closed-loop execution record sampled every record_dt.
struct RolloutTrace {
  double dt_record = 0.02;
  std::vector<RigidState> states;
  std::vector<Vec4> rotor_speeds;  // rad/s
  std::vector<double> tracking_error;  // |p - p_ref| at each sample
  double duration() const { return states.empty() ? 0.0 : double(states.size() - 1) * dt_record; }
  std::size_t size() const { return states.size(); }
};

/// Runs the trajectory, then settles until the position error drops below
/// the tolerance (checked at record instants, capped by settle_window). The
/// trace always spans at least one record interval. Fails with Diverged when
/// the position error exceeds divergence_limit.
Expected<RolloutTrace> rollout(const TimedTrajectory& trajectory, const RigidState& initial, const QuadParams& params,
                               const ControllerGains& gains, const RolloutConfig& config = {});

/// Tabular export: t x y z vx vy vz roll pitch yaw w1 w2 w3 w4.
std::string export_trace(const RolloutTrace& trace);

}  // namespace eaae
