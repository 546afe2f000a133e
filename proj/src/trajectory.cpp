#include "eaae/planning.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace eaae {

namespace {

// A rest-to-rest path decomposes into straight pieces joined by circular
// arcs. Speeds are fixed at element boundaries; lines run a trapezoid
// between them and arcs are flown at constant speed.
struct Element {
  bool arc = false;
  double length = 0.0;
  // line
  Vec3 start = Vec3::Zero();
  Vec3 dir = Vec3::UnitX();
  // arc: p(phi) = center + R(-n cos(phi) + u sin(phi)), phi in [0, angle]
  Vec3 center = Vec3::Zero();
  Vec3 u = Vec3::UnitX();
  Vec3 n = Vec3::UnitY();
  double radius = 0.0;
  double angle = 0.0;
  double cap = 0.0;  // arc speed cap
  // profile
  double v_in = 0.0;
  double v_out = 0.0;
  double v_peak = 0.0;
  double t_acc = 0.0;
  double t_cruise = 0.0;
  double t_dec = 0.0;
  double d_acc = 0.0;
  double d_cruise = 0.0;
  double duration = 0.0;
};

struct Kinematics {
  Vec3 p, v, a;
};

std::vector<Element> build_elements(const std::vector<Vec3>& pts, const MotionLimits& lim) {
  std::vector<Element> elems;
  const std::size_t m = pts.size();
  // Tangent distance carved out of each segment end by the adjacent corner.
  std::vector<double> cut(m, 0.0);
  std::vector<Element> arcs(m);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const Vec3 a = pts[i] - pts[i - 1];
    const Vec3 b = pts[i + 1] - pts[i];
    const Vec3 u1 = a.normalized();
    const Vec3 u2 = b.normalized();
    const double theta = std::acos(std::clamp(u1.dot(u2), -1.0, 1.0));
    if (theta < 1e-6) continue;
    const double d = std::min({lim.corner_round, 0.5 * a.norm(), 0.5 * b.norm()});
    if (d <= 0.0) continue;
    const double th = std::min(theta, kPi - 1e-6);
    Element arc;
    arc.arc = true;
    arc.radius = d / std::tan(0.5 * th);
    arc.angle = th;
    arc.u = u1;
    Vec3 perp = u2 - u2.dot(u1) * u1;
    if (perp.norm() < 1e-12) {
      // Reversal: any normal works.
      perp = u1.unitOrthogonal();
    }
    arc.n = perp.normalized();
    const Vec3 tangent_in = pts[i] - d * u1;
    arc.center = tangent_in + arc.radius * arc.n;
    arc.length = arc.radius * arc.angle;
    arc.cap = std::min(lim.v_max, std::sqrt(lim.a_max * arc.radius));
    cut[i] = d;
    arcs[i] = arc;
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const Vec3 seg = pts[i + 1] - pts[i];
    const Vec3 dir = seg.normalized();
    Element line;
    line.start = pts[i] + cut[i] * dir;
    line.dir = dir;
    line.length = std::max(0.0, seg.norm() - cut[i] - cut[i + 1]);
    elems.push_back(line);
    if (i + 1 < m - 1 && arcs[i + 1].arc) elems.push_back(arcs[i + 1]);
  }
  return elems;
}

void assign_speeds(std::vector<Element>& elems, const MotionLimits& lim) {
  const std::size_t m = elems.size();
  // Boundary speeds b[0..m]; rest at both ends.
  std::vector<double> b(m + 1, lim.v_max);
  b.front() = 0.0;
  b.back() = 0.0;
  for (std::size_t e = 0; e < m; ++e)
    if (elems[e].arc) b[e] = b[e + 1] = std::min({b[e], b[e + 1], elems[e].cap});
  for (std::size_t e = 0; e < m; ++e) {
    if (elems[e].arc) {
      b[e + 1] = std::min(b[e + 1], b[e]);
      b[e] = b[e + 1];
    } else {
      b[e + 1] = std::min(b[e + 1], std::sqrt(b[e] * b[e] + 2.0 * lim.a_max * elems[e].length));
    }
  }
  for (std::size_t e = m; e-- > 0;) {
    if (elems[e].arc) {
      b[e] = std::min(b[e], b[e + 1]);
      b[e + 1] = b[e];
    } else {
      b[e] = std::min(b[e], std::sqrt(b[e + 1] * b[e + 1] + 2.0 * lim.a_max * elems[e].length));
    }
  }
  const double a = lim.a_max;
  for (std::size_t e = 0; e < m; ++e) {
    Element& el = elems[e];
    el.v_in = b[e];
    el.v_out = b[e + 1];
    if (el.arc) {
      el.v_peak = std::max(el.v_in, 1e-3);
      el.duration = el.length / el.v_peak;
      continue;
    }
    if (el.length <= 0.0) {
      el.duration = 0.0;
      el.v_peak = el.v_in;
      continue;
    }
    double vp = std::min(lim.v_max, std::sqrt(a * el.length + 0.5 * (el.v_in * el.v_in + el.v_out * el.v_out)));
    vp = std::max({vp, el.v_in, el.v_out});
    el.v_peak = vp;
    el.d_acc = (vp * vp - el.v_in * el.v_in) / (2.0 * a);
    const double d_dec = (vp * vp - el.v_out * el.v_out) / (2.0 * a);
    el.d_cruise = std::max(0.0, el.length - el.d_acc - d_dec);
    el.t_acc = (vp - el.v_in) / a;
    el.t_dec = (vp - el.v_out) / a;
    el.t_cruise = vp > 0.0 ? el.d_cruise / vp : 0.0;
    el.duration = el.t_acc + el.t_cruise + el.t_dec;
  }
}

Kinematics evaluate(const Element& el, double tau, double a_max) {
  if (el.arc) {
    const double v = el.v_peak;
    const double phi = std::clamp(v * tau / el.radius, 0.0, el.angle);
    const double c = std::cos(phi), s = std::sin(phi);
    const Vec3 p = el.center + el.radius * (-el.n * c + el.u * s);
    const Vec3 vel = v * (el.n * s + el.u * c);
    const Vec3 acc = (v * v / el.radius) * (el.n * c - el.u * s);
    return {p, vel, acc};
  }
  double s = 0.0, v = 0.0, acc = 0.0;
  if (tau < el.t_acc) {
    s = el.v_in * tau + 0.5 * a_max * tau * tau;
    v = el.v_in + a_max * tau;
    acc = a_max;
  } else if (tau < el.t_acc + el.t_cruise) {
    s = el.d_acc + el.v_peak * (tau - el.t_acc);
    v = el.v_peak;
  } else {
    const double td = std::min(tau - el.t_acc - el.t_cruise, el.t_dec);
    s = el.d_acc + el.d_cruise + el.v_peak * td - 0.5 * a_max * td * td;
    v = el.v_peak - a_max * td;
    acc = -a_max;
  }
  s = std::clamp(s, 0.0, el.length);
  return {el.start + s * el.dir, v * el.dir, acc * el.dir};
}

}  // namespace

TrajectorySample TimedTrajectory::at(double t) const {
  if (samples.empty()) return {};
  if (t <= samples.front().t) return samples.front();
  if (t >= samples.back().t) {
    TrajectorySample s = samples.back();
    s.t = t;
    return s;
  }
  const std::size_t i = std::min(samples.size() - 2, std::size_t((t - samples.front().t) / dt));
  const auto& a = samples[i];
  const auto& b = samples[i + 1];
  const double w = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
  TrajectorySample s;
  s.t = t;
  s.position = (1.0 - w) * a.position + w * b.position;
  s.velocity = (1.0 - w) * a.velocity + w * b.velocity;
  s.acceleration = (1.0 - w) * a.acceleration + w * b.acceleration;
  s.jerk = (b.acceleration - a.acceleration) / (b.t - a.t);
  s.yaw = wrap_angle(a.yaw + w * wrap_angle(b.yaw - a.yaw));
  s.yaw_rate = (1.0 - w) * a.yaw_rate + w * b.yaw_rate;
  return s;
}

TimedTrajectory time_parameterize(const PathPolyline& path, double start_yaw, double goal_yaw,
                                  const MotionLimits& limits, double dt) {
  std::vector<Vec3> pts;
  for (const auto& w : path.waypoints)
    if (pts.empty() || (w - pts.back()).norm() > 1e-9) pts.push_back(w);

  std::vector<Element> elems;
  if (pts.size() >= 2) {
    elems = build_elements(pts, limits);
    assign_speeds(elems, limits);
  }
  std::vector<double> t_start(elems.size() + 1, 0.0);
  for (std::size_t e = 0; e < elems.size(); ++e) t_start[e + 1] = t_start[e] + elems[e].duration;
  const double t_translate = t_start.back();

  const double dyaw = wrap_angle(goal_yaw - start_yaw);
  const double t_yaw = limits.yaw_rate_max > 0.0 ? std::abs(dyaw) / limits.yaw_rate_max : 0.0;
  const double total = std::max(t_translate, t_yaw);
  const double yaw_rate = total > 0.0 ? dyaw / total : 0.0;

  const Vec3 origin = pts.empty() ? Vec3::Zero() : pts.front();
  const Vec3 end = pts.empty() ? Vec3::Zero() : pts.back();

  TimedTrajectory traj;
  traj.dt = dt;
  const std::size_t steps = total > 0.0 ? std::size_t(std::ceil(total / dt - 1e-9)) : 0;
  traj.samples.reserve(steps + 1);
  std::size_t e = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    TrajectorySample s;
    s.t = double(k) * dt;
    if (s.t >= total) {
      s.position = end;
      s.yaw = wrap_angle(start_yaw + dyaw);
    } else {
      if (elems.empty() || s.t >= t_translate) {
        s.position = end;
      } else {
        while (e + 1 < elems.size() && s.t >= t_start[e + 1]) ++e;
        const Kinematics kin = evaluate(elems[e], s.t - t_start[e], limits.a_max);
        s.position = kin.p;
        s.velocity = kin.v;
        s.acceleration = kin.a;
      }
      s.yaw = wrap_angle(start_yaw + yaw_rate * s.t);
      s.yaw_rate = yaw_rate;
    }
    traj.samples.push_back(s);
  }
  if (traj.samples.size() == 1) traj.samples.front().position = origin;
  return traj;
}

std::string export_trajectory(const TimedTrajectory& trajectory) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "t,x,y,z,vx,vy,vz,ax,ay,az,yaw\n";
  for (const auto& s : trajectory.samples) {
    os << s.t << ',' << s.position.x() << ',' << s.position.y() << ',' << s.position.z() << ',' << s.velocity.x()
       << ',' << s.velocity.y() << ',' << s.velocity.z() << ',' << s.acceleration.x() << ',' << s.acceleration.y()
       << ',' << s.acceleration.z() << ',' << s.yaw << '\n';
  }
  return os.str();
}

}  // namespace eaae
