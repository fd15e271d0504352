#include "lilo/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lilo/common.hpp"

namespace lilo {

namespace {

constexpr double kSmallAngle = 1e-8;
constexpr double kDriftTolerance = 1e-9;
constexpr double kNearPiMargin = 1e-6;

// V(ω) such that translation = V·linear in se3_exp.
Mat3 left_jacobian(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + 0.5 * w + (1.0 / 6.0) * w * w;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + ((1.0 - std::cos(theta)) / t2) * w +
         ((theta - std::sin(theta)) / (t2 * theta)) * w * w;
}

Mat3 left_jacobian_inverse(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < kSmallAngle) {
    return Mat3::Identity() - 0.5 * w + (1.0 / 12.0) * w * w;
  }
  const double half = 0.5 * theta;
  const double coeff = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  return Mat3::Identity() - 0.5 * w + coeff * w * w;
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0.0, -v.z(),  v.y(),
         v.z(),    0.0, -v.x(),
        -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Mat3 so3_exp(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + w + 0.5 * w * w;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + (std::sin(theta) / theta) * w + ((1.0 - std::cos(theta)) / t2) * w * w;
}

Vec3 so3_log(const Mat3& r) {
  const Vec3 axis_sin(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_theta = 0.5 * axis_sin.norm();
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);
  if (theta > std::numbers::pi - kNearPiMargin) {
    throw Error(ErrorCode::kRotationNearPi, "rotation angle " + std::to_string(theta));
  }
  if (theta < kSmallAngle) {
    // θ/(2 sin θ) ≈ 1/2 + θ²/12
    return (0.5 + theta * theta / 12.0) * axis_sin;
  }
  return (theta / (2.0 * sin_theta)) * axis_sin;
}

double orthonormality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 orthonormalize(const Mat3& r) {
  Vec3 c0 = r.col(0).normalized();
  Vec3 c1 = r.col(1) - c0.dot(r.col(1)) * c0;
  c1.normalize();
  Mat3 out;
  out.col(0) = c0;
  out.col(1) = c1;
  out.col(2) = c0.cross(c1);
  return out;
}

PoseSE3 PoseSE3::from_matrix(const Eigen::Matrix4d& m) {
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

Eigen::Matrix4d PoseSE3::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

PoseSE3 PoseSE3::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

double PoseSE3::rotation_angle() const {
  // cos θ from the trace, sin θ from the antisymmetric part; atan2 keeps
  // full precision near 0 where arccos loses half the digits.
  const Vec3 axial(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                   rotation(1, 0) - rotation(0, 1));
  return std::atan2(0.5 * axial.norm(), 0.5 * (rotation.trace() - 1.0));
}

PoseSE3 se3_compose(const PoseSE3& a, const PoseSE3& b) {
  PoseSE3 out{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
  if (orthonormality_error(out.rotation) > kDriftTolerance) {
    out.rotation = orthonormalize(out.rotation);
  }
  return out;
}

PoseSE3 se3_exp(const Twist& xi) {
  return {so3_exp(xi.angular), left_jacobian(xi.angular) * xi.linear};
}

Twist se3_log(const PoseSE3& pose) {
  const Vec3 omega = so3_log(pose.rotation);
  return {omega, left_jacobian_inverse(omega) * pose.translation};
}

Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rot_y(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }
Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

}  // namespace lilo
