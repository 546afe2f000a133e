#include "eaae/vehicle.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace eaae {

namespace {

Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

// Rows: collective thrust, roll, pitch, yaw torque.
Eigen::Matrix4d mixer_matrix(const QuadParams& p) {
  const double s = p.arm_length / std::sqrt(2.0);
  const double k = p.c_q_over_c_t;
  const double x[4] = {s, -s, -s, s};
  const double y[4] = {s, s, -s, -s};
  const double spin[4] = {-1.0, 1.0, -1.0, 1.0};
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i) {
    m(0, i) = 1.0;
    m(1, i) = y[i];
    m(2, i) = -x[i];
    m(3, i) = k * spin[i];
  }
  return m;
}

bool within(const Vec4& t, double lo, double hi) { return (t.array() >= lo).all() && (t.array() <= hi).all(); }

Mat3 orthonormalize(const Mat3& r) { return Eigen::Quaterniond(r).normalized().toRotationMatrix(); }

}  // namespace

void QuadParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("quad mass must be positive");
  if (rotor_count != 4) throw std::invalid_argument("rotor_count must be 4");
  if (!(omega_min >= 0.0 && omega_min < omega_max)) throw std::invalid_argument("need 0 <= omega_min < omega_max");
  if (!(c_t > 0.0)) throw std::invalid_argument("c_t must be positive");
  if (!(inertia_diag.array() > 0.0).all()) throw std::invalid_argument("inertia must be positive");
  if (!(arm_length > 0.0)) throw std::invalid_argument("arm_length must be positive");
}

ControlOutput geometric_control(const RigidState& state, const TrajectorySample& ref, const QuadParams& params,
                                const ControllerGains& gains) {
  const Vec3 e_p = ref.position - state.position;
  const Vec3 e_v = ref.velocity - state.velocity;
  const Vec3 f_des =
      params.mass * (ref.acceleration + kGravity * Vec3::UnitZ()) + gains.kp * e_p + gains.kv * e_v;
  const Mat3& R = state.attitude;

  Vec3 b3 = f_des.norm() > 1e-9 ? Vec3(f_des.normalized()) : Vec3::UnitZ();
  const Vec3 b1c(std::cos(ref.yaw), std::sin(ref.yaw), 0.0);
  Vec3 b2 = b3.cross(b1c);
  if (b2.norm() < 1e-9) b2 = R.col(1);
  b2.normalize();
  const Vec3 b1 = b2.cross(b3);
  Mat3 Rd;
  Rd.col(0) = b1;
  Rd.col(1) = b2;
  Rd.col(2) = b3;

  const Vec3 e_r = 0.5 * vee(Rd.transpose() * R - R.transpose() * Rd);
  // Desired body rates: rotation of the thrust axis implied by the reference
  // jerk, plus the yaw rate about it.
  Vec3 omega_world = ref.yaw_rate * b3.z() * b3;
  if (const double f = f_des.norm(); f > 1e-9) {
    const Vec3 df = params.mass * ref.jerk;
    omega_world += b3.cross((df - b3 * b3.dot(df)) / f);
  }
  const Vec3 omega_d = Rd.transpose() * omega_world;
  const Vec3 e_w = state.body_rates - R.transpose() * Rd * omega_d;
  const Vec3 J = params.inertia_diag;
  const Vec3 Jw = J.cwiseProduct(state.body_rates);

  ControlOutput out;
  out.thrust = f_des.dot(R.col(2));
  out.torque = -gains.k_r * e_r - gains.k_omega * e_w + state.body_rates.cross(Jw);
  return out;
}

ControlOutput mix(const Vec4& rotor_thrusts, const QuadParams& params) {
  const Vec4 w = mixer_matrix(params) * rotor_thrusts;
  return {w[0], Vec3(w[1], w[2], w[3])};
}

Vec4 allocate(double collective_thrust, const Vec3& torque, const QuadParams& params) {
  const Eigen::Matrix4d inv = mixer_matrix(params).inverse();
  const double lo = params.c_t * params.omega_min * params.omega_min;
  const double hi = params.c_t * params.omega_max * params.omega_max;
  const Vec4 full = inv * Vec4(collective_thrust, torque.x(), torque.y(), torque.z());
  if (within(full, lo, hi)) return full;
  // Keep thrust, roll and pitch; shrink yaw torque to the largest feasible
  // fraction. Clip only if even zero yaw torque saturates.
  const Vec4 base = inv * Vec4(collective_thrust, torque.x(), torque.y(), 0.0);
  if (!within(base, lo, hi)) return base.cwiseMax(lo).cwiseMin(hi);
  const Vec4 step = full - base;
  double scale = 1.0;
  for (int i = 0; i < 4; ++i) {
    if (step[i] > 0.0) scale = std::min(scale, (hi - base[i]) / step[i]);
    if (step[i] < 0.0) scale = std::min(scale, (lo - base[i]) / step[i]);
  }
  return (base + std::max(scale, 0.0) * step).cwiseMax(lo).cwiseMin(hi);
}

double rotor_speed_from_thrust(double thrust, const QuadParams& params) {
  const double w = std::sqrt(std::max(thrust, 0.0) / params.c_t);
  return std::clamp(w, params.omega_min, params.omega_max);
}

StateDerivative dynamics_derivative(const RigidState& s, const Vec4& rotor_speeds, const QuadParams& params) {
  const Vec4 thrusts = params.c_t * rotor_speeds.cwiseAbs2();
  const ControlOutput w = mix(thrusts, params);
  const Vec3 J = params.inertia_diag;
  StateDerivative d;
  d.velocity = s.velocity;
  d.acceleration = s.attitude.col(2) * (w.thrust / params.mass) - kGravity * Vec3::UnitZ();
  d.angular_acceleration = (w.torque - s.body_rates.cross(J.cwiseProduct(s.body_rates))).cwiseQuotient(J);
  return d;
}

RigidState step_dynamics(const RigidState& state, const Vec4& rotor_speeds, const QuadParams& params, double dt) {
  const StateDerivative d = dynamics_derivative(state, rotor_speeds, params);
  RigidState next;
  next.velocity = state.velocity + d.acceleration * dt;
  next.position = state.position + next.velocity * dt;
  next.body_rates = state.body_rates + d.angular_acceleration * dt;
  const Vec3 rot = next.body_rates * dt;
  const double angle = rot.norm();
  const Mat3 exp_map = angle > 0.0 ? Mat3(Eigen::AngleAxisd(angle, rot / angle)) : Mat3::Identity();
  next.attitude = orthonormalize(state.attitude * exp_map);
  return next;
}

Expected<RolloutTrace> rollout(const TimedTrajectory& trajectory, const RigidState& initial, const QuadParams& params,
                               const ControllerGains& gains, const RolloutConfig& config) {
  if (trajectory.empty()) throw std::invalid_argument("rollout needs a nonempty trajectory");
  const double control_dt = 1.0 / config.control_hz;
  const double sub_dt = control_dt / config.substeps;
  const long per_record = std::lround(config.record_dt * config.control_hz);
  if (per_record < 1 || std::abs(per_record * control_dt - config.record_dt) > 1e-9)
    throw std::invalid_argument("record_dt must be a whole number of control periods");

  const double t_end = trajectory.duration();
  RolloutTrace trace;
  trace.dt_record = config.record_dt;
  const std::size_t expected = std::size_t((t_end + config.settle_window) / config.record_dt) + 2;
  trace.states.reserve(expected);
  trace.rotor_speeds.reserve(expected);
  trace.tracking_error.reserve(expected);

  RigidState state = initial;
  for (long step = 0;; ++step) {
    const bool record = step % per_record == 0;
    const double t = record ? double(step / per_record) * config.record_dt : double(step) * control_dt;
    const TrajectorySample ref = trajectory.at(t);
    const double err = (state.position - ref.position).norm();
    if (!std::isfinite(err) || err > config.divergence_limit) {
      std::ostringstream os;
      os << "position error " << err << " m at t = " << t << " s";
      return Failure{FailureKind::Diverged, os.str()};
    }

    const ControlOutput u = geometric_control(state, ref, params, gains);
    const Vec4 thrusts = allocate(u.thrust, u.torque, params);
    Vec4 omega;
    for (int i = 0; i < 4; ++i) omega[i] = rotor_speed_from_thrust(thrusts[i], params);

    if (record) {
      trace.states.push_back(state);
      trace.rotor_speeds.push_back(omega);
      trace.tracking_error.push_back(err);
      const bool done_tracking = t >= t_end - 1e-9;
      const bool settled = err < config.settle_tolerance || t >= t_end + config.settle_window - 1e-9;
      if (done_tracking && settled && trace.states.size() >= 2) break;
    }
    for (int k = 0; k < config.substeps; ++k) state = step_dynamics(state, omega, params, sub_dt);
  }
  return trace;
}

std::string export_trace(const RolloutTrace& trace) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "t,x,y,z,vx,vy,vz,roll,pitch,yaw,w1,w2,w3,w4\n";
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const auto& s = trace.states[i];
    const Mat3& R = s.attitude;
    const double roll = std::atan2(R(2, 1), R(2, 2));
    const double pitch = -std::asin(std::clamp(R(2, 0), -1.0, 1.0));
    const double yaw = yaw_of(R);
    os << double(i) * trace.dt_record << ',' << s.position.x() << ',' << s.position.y() << ',' << s.position.z()
       << ',' << s.velocity.x() << ',' << s.velocity.y() << ',' << s.velocity.z() << ',' << roll << ',' << pitch
       << ',' << yaw;
    for (int r = 0; r < 4; ++r) os << ',' << trace.rotor_speeds[i][r];
    os << '\n';
  }
  return os.str();
}

}  // namespace eaae
