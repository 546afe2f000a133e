#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eaae/vehicle.hpp"

#include <random>

using namespace eaae;

namespace {

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

// Classic RK4 on (p, v, R, w) with R' = R [w]x, written out independently.
struct Rk4State {
  Vec3 p, v;
  Mat3 R;
  Vec3 w;
};

Rk4State rk4_step(const Rk4State& s, const Vec4& omega, const QuadParams& q, double h) {
  const double ct = q.c_t, s2 = q.arm_length / std::sqrt(2.0), k = q.c_q_over_c_t;
  Vec4 T;
  for (int i = 0; i < 4; ++i) T[i] = ct * omega[i] * omega[i];
  // front-left, rear-left, rear-right, front-right; 0 and 2 counter-clockwise
  const Vec3 tau(s2 * (T[0] + T[1] - T[2] - T[3]), s2 * (-T[0] + T[1] + T[2] - T[3]),
                 k * (-T[0] + T[1] - T[2] + T[3]));
  const Vec3 J = q.inertia_diag;
  auto deriv = [&](const Rk4State& x) {
    Rk4State d;
    d.p = x.v;
    d.v = x.R.col(2) * (T.sum() / q.mass) - Vec3(0, 0, 9.81);
    d.R = x.R * hat(x.w);
    d.w = (tau - x.w.cross(J.cwiseProduct(x.w))).cwiseQuotient(J);
    return d;
  };
  auto add = [](const Rk4State& a, const Rk4State& d, double f) {
    return Rk4State{a.p + f * d.p, a.v + f * d.v, a.R + f * d.R, a.w + f * d.w};
  };
  const auto k1 = deriv(s), k2 = deriv(add(s, k1, h / 2)), k3 = deriv(add(s, k2, h / 2)), k4 = deriv(add(s, k3, h));
  Rk4State n;
  n.p = s.p + h / 6 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
  n.v = s.v + h / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
  n.R = s.R + h / 6 * (k1.R + 2 * k2.R + 2 * k3.R + k4.R);
  n.w = s.w + h / 6 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w);
  return n;
}

double hover_power_oracle(double ct, const QuadParams& q) {
  const double w = std::sqrt(q.mass * 9.81 / (4 * ct));
  return 4 * (6.088e-3 * w + 1.875e-8 * std::pow(w, 3) + 7.7e-20 * std::pow(w, 6));
}

TimedTrajectory hover_reference(const Vec3& p, double yaw, double duration) {
  TimedTrajectory tr;
  for (int i = 0; i * 0.02 <= duration + 1e-9; ++i) {
    TrajectorySample s;
    s.t = i * 0.02;
    s.position = p;
    s.yaw = yaw;
    tr.samples.push_back(s);
  }
  return tr;
}

double orthonormality_error(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("hover control and allocation") {
  const QuadParams q;
  const ControllerGains gains;
  const auto state = RigidState::at_rest(Vec3(0, 0, 1), 0.4);
  TrajectorySample ref;
  ref.position = state.position;
  ref.yaw = 0.4;
  const auto u = geometric_control(state, ref, q, gains);
  CHECK(u.thrust == doctest::Approx(0.752 * 9.81).epsilon(1e-12));
  CHECK(u.thrust == doctest::Approx(7.377).epsilon(1e-4));
  CHECK(u.torque.norm() < 1e-9);
  const Vec4 t = allocate(u.thrust, u.torque, q);
  for (int i = 0; i < 4; ++i) CHECK(t[i] == doctest::Approx(1.84428).epsilon(1e-5));
}

TEST_CASE("control signs and feedforward") {
  const QuadParams q;
  const auto state = RigidState::at_rest(Vec3::Zero(), 0.0);
  TrajectorySample ref;
  ref.position = Vec3(1, 0, 0);
  const auto u = geometric_control(state, ref, q, ControllerGains{});
  CHECK(u.torque.y() > 0.0);  // pitch toward +x
  CHECK(std::abs(u.torque.x()) < 1e-12);

  ref.position = Vec3::Zero();
  ref.acceleration = Vec3(0, 0, 1);
  const auto ff = geometric_control(state, ref, q, ControllerGains{0, 0, 0, 0});
  CHECK(ff.thrust == doctest::Approx(0.752 * 10.81));
  CHECK(ff.torque.norm() < 1e-12);
}

TEST_CASE("mixer round trip and yaw split") {
  const QuadParams q;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uf(5.0, 12.0), ut(-0.05, 0.05), uy(-0.01, 0.01);
  for (int n = 0; n < 200; ++n) {
    const double f = uf(rng);
    const Vec3 tau(ut(rng), ut(rng), uy(rng));
    const Vec4 t = allocate(f, tau, q);
    const auto back = mix(t, q);
    CHECK(std::abs(back.thrust - f) < 1e-9);
    CHECK((back.torque - tau).norm() < 1e-9);
  }
  const Vec4 yaw = allocate(7.377, Vec3(0, 0, 0.02), q);
  CHECK(yaw.sum() == doctest::Approx(7.377));
  CHECK(yaw[1] == doctest::Approx(yaw[3]));
  CHECK(yaw[0] == doctest::Approx(yaw[2]));
  CHECK(yaw[1] > yaw[0]);
}

TEST_CASE("saturated allocation keeps thrust before yaw") {
  const QuadParams q;
  const double hi = q.c_t * q.omega_max * q.omega_max;
  const double lo = q.c_t * q.omega_min * q.omega_min;
  // Yaw demand far beyond authority: thrust and roll/pitch survive.
  const Vec4 t = allocate(7.377, Vec3(0.01, 0, 5.0), q);
  const auto w = mix(t, q);
  CHECK(w.thrust == doctest::Approx(7.377));
  CHECK(w.torque.x() == doctest::Approx(0.01));
  CHECK(w.torque.z() > 0.0);
  for (int i = 0; i < 4; ++i) {
    CHECK(t[i] >= lo - 1e-12);
    CHECK(t[i] <= hi + 1e-12);
  }
  const Vec4 clipped = allocate(1e3, Vec3::Zero(), q);
  for (int i = 0; i < 4; ++i) CHECK(clipped[i] == doctest::Approx(hi));
}

TEST_CASE("rotor speed from thrust") {
  const QuadParams q;
  CHECK(rotor_speed_from_thrust(0.0, q) == q.omega_min);
  CHECK(rotor_speed_from_thrust(q.c_t * 1e6, q) == doctest::Approx(1000.0));
  CHECK(rotor_speed_from_thrust(1e6, q) == q.omega_max);
  CHECK(rotor_speed_from_thrust(0.752 * 9.81 / 4, q) == doctest::Approx(q.hover_rotor_speed()));
}

TEST_CASE("thrust coefficient calibration by bisection") {
  QuadParams q;
  double lo = 1e-7, hi = 1e-4;  // hover power falls as c_t grows
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (hover_power_oracle(mid, q) > 120.0 ? lo : hi) = mid;
  }
  CHECK(q.c_t == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
  CHECK(hover_power_oracle(q.c_t, q) == doctest::Approx(120.0).epsilon(1e-9));
  CHECK(q.hover_rotor_speed() == doctest::Approx(1075.61).epsilon(1e-5));
}

TEST_CASE("parameter validation") {
  QuadParams q;
  CHECK_NOTHROW(q.validate());
  q.rotor_count = 6;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q = {};
  q.omega_min = 4000;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q = {};
  q.mass = 0;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("single dynamics steps") {
  const QuadParams q;
  const auto s = RigidState::at_rest(Vec3(0, 0, 1), 0.0);
  const Vec4 hover = Vec4::Constant(q.hover_rotor_speed());
  const auto n = step_dynamics(s, hover, q, 1.0 / 1200);
  CHECK((n.position - s.position).norm() < 1e-6);
  const auto d = dynamics_derivative(s, Vec4::Zero(), q);
  CHECK(d.acceleration.z() == doctest::Approx(-9.81));
  CHECK(d.acceleration.head<2>().norm() == 0.0);
}

TEST_CASE("step_dynamics matches an RK4 reference over 1 s") {
  const QuadParams q;
  const double wh = q.hover_rotor_speed();
  // Small roll and yaw imbalance on top of hover.
  const Vec4 omega(wh * 1.0003, wh * 1.0002, wh * 0.9997, wh * 0.9998);
  auto s = RigidState::at_rest(Vec3(0, 0, 1), 0.3);
  Rk4State r{s.position, s.velocity, s.attitude, s.body_rates};
  const double dt = 1.0 / 1200;
  for (int i = 0; i < 1200; ++i) {
    s = step_dynamics(s, omega, q, dt);
    for (int j = 0; j < 10; ++j) r = rk4_step(r, omega, q, dt / 10);
  }
  CHECK(s.body_rates.norm() > 0.01);
  CHECK((s.position - r.p).norm() < 1e-4);
  CHECK((s.velocity - r.v).norm() < 1e-4);
  CHECK((s.attitude - r.R).cwiseAbs().maxCoeff() < 1e-4);
  CHECK((s.body_rates - r.w).norm() < 1e-4);
}

TEST_CASE("closed-loop hover") {
  const QuadParams q;
  const auto start = RigidState::at_rest(Vec3(1, 2, 1), 0.7);
  const auto tr = rollout(hover_reference(start.position, 0.7, 10.0), start, q, ControllerGains{});
  REQUIRE(tr);
  CHECK(tr->size() == 501);
  CHECK(tr->duration() == doctest::Approx(10.0));
  const double wh = q.hover_rotor_speed();
  double drift = 0.0;
  for (std::size_t i = 0; i < tr->size(); ++i) {
    for (int r = 0; r < 4; ++r) CHECK(std::abs(tr->rotor_speeds[i][r] - wh) <= 0.02 * wh);
    drift = std::max(drift, (tr->states[i].position - start.position).norm());
  }
  CHECK(drift < 0.02);
}

TEST_CASE("straight trapezoid tracking") {
  const QuadParams q;
  const PathPolyline path{{Vec3(0, 0, 1), Vec3(10, 0, 1)}};
  const auto ref = time_parameterize(path, 0.0, 0.0, MotionLimits{}, 0.02);
  const auto tr = rollout(ref, RigidState::at_rest(Vec3(0, 0, 1), 0.0), q, ControllerGains{});
  REQUIRE(tr);
  CHECK((tr->states.back().position - Vec3(10, 0, 1)).norm() < 0.1);
  for (std::size_t i = 0; i < tr->size(); ++i) {
    CHECK(orthonormality_error(tr->states[i].attitude) < 1e-6);
    CHECK(tr->states[i].attitude.determinant() == doctest::Approx(1.0).epsilon(1e-6));
    for (int r = 0; r < 4; ++r) {
      CHECK(tr->rotor_speeds[i][r] >= q.omega_min);
      CHECK(tr->rotor_speeds[i][r] <= q.omega_max);
    }
  }
  const std::string text = export_trace(*tr);
  CHECK(std::size_t(std::count(text.begin(), text.end(), '\n')) == tr->size() + 1);
}

TEST_CASE("tracking error stays under 0.3 m on random limit-respecting references") {
  const QuadParams q;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-8.0, 8.0), uz(0.5, 2.0), uyaw(-kPi, kPi);
  std::uniform_int_distribution<int> count(2, 5);
  for (int trial = 0; trial < 25; ++trial) {
    PathPolyline p;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) p.waypoints.push_back(Vec3(u(rng), u(rng), uz(rng)));
    const double y0 = uyaw(rng);
    const auto ref = time_parameterize(p, y0, uyaw(rng), MotionLimits{}, 0.02);
    const auto tr = rollout(ref, RigidState::at_rest(p.waypoints.front(), y0), q, ControllerGains{});
    REQUIRE(tr);
    double worst = 0.0;
    for (double e : tr->tracking_error) worst = std::max(worst, e);
    CHECK(worst < 0.3);
    for (const auto& s : tr->states) CHECK(orthonormality_error(s.attitude) < 1e-6);
  }
}

TEST_CASE("reference beyond the actuator envelope diverges") {
  const QuadParams q;
  TimedTrajectory tr;
  const double a = 40.0;  // 10x a_max
  for (int i = 0; i <= 100; ++i) {
    TrajectorySample s;
    s.t = i * 0.02;
    s.position = Vec3(0.5 * a * s.t * s.t, 0, 1);
    s.velocity = Vec3(a * s.t, 0, 0);
    s.acceleration = Vec3(a, 0, 0);
    tr.samples.push_back(s);
  }
  const auto r = rollout(tr, RigidState::at_rest(Vec3(0, 0, 1), 0.0), q, ControllerGains{});
  REQUIRE_FALSE(r);
  CHECK(r.error().kind == FailureKind::Diverged);
}
