#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace eaae {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kGravity = 9.81;
inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

/// Heading of a body->world rotation, measured about world z.
inline double yaw_of(const Mat3& R) { return std::atan2(R(1, 0), R(0, 0)); }

inline Mat3 yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

enum class FailureKind { Unreachable, Diverged, TooShort, NoViewpoint, Clearance };

inline const char* to_string(FailureKind k) {
  switch (k) {
    case FailureKind::Unreachable: return "unreachable";
    case FailureKind::Diverged: return "diverged";
    case FailureKind::TooShort: return "too_short";
    case FailureKind::NoViewpoint: return "no_viewpoint";
    case FailureKind::Clearance: return "clearance";
  }
  return "unknown";
}

struct Failure {
  FailureKind kind;
  std::string detail;

  std::string describe() const {
    return detail.empty() ? to_string(kind) : std::string(to_string(kind)) + ": " + detail;
  }
};

/// Value-or-failure for expected, non-exceptional outcomes (unreachable
/// goals, diverged rollouts). Configuration and I/O problems throw instead.
template <class T>
class Expected {
 public:
  Expected(T value) : v_(std::move(value)) {}
  Expected(Failure f) : v_(std::move(f)) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("Expected::value on failure: " + error().describe());
    return std::get<T>(v_);
  }
  T& value() & {
    if (!ok()) throw std::logic_error("Expected::value on failure: " + error().describe());
    return std::get<T>(v_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("Expected::value on failure: " + error().describe());
    return std::get<T>(std::move(v_));
  }
  const Failure& error() const { return std::get<Failure>(v_); }

  const T* operator->() const { return &value(); }
  const T& operator*() const { return value(); }

 private:
  std::variant<T, Failure> v_;
};

}  // namespace eaae
