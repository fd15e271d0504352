#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "lilo/common.hpp"

namespace lilo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Tangent-space element of SE(3). Stacked as (angular, linear) when a
/// 6-vector is needed, which is also the column order of every jacobian.
struct Twist {
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();

  static Twist from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
  Vec6 vector() const {
    Vec6 v;
    v << angular, linear;
    return v;
  }
  Twist scaled(double s) const { return {angular * s, linear * s}; }
  double norm() const { return vector().norm(); }
};

/// Rigid transform x -> R x + t.
struct PoseSE3 {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static PoseSE3 identity() { return {}; }
  static PoseSE3 from_matrix(const Eigen::Matrix4d& m);
  Eigen::Matrix4d matrix() const;

  PoseSE3 inverse() const;
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  /// Rotation angle in [0, π] radians.
  double rotation_angle() const;
};

/// Applies b first, then a. Re-orthonormalizes the result when RᵀR drifts
/// from I by more than 1e-9.
PoseSE3 se3_compose(const PoseSE3& a, const PoseSE3& b);
inline PoseSE3 operator*(const PoseSE3& a, const PoseSE3& b) { return se3_compose(a, b); }

inline Vec3 se3_apply(const PoseSE3& pose, const Vec3& p) { return pose.apply(p); }

PoseSE3 se3_exp(const Twist& xi);
/// Throws Error(kRotationNearPi) when the rotation angle exceeds π − 1e-6.
Twist se3_log(const PoseSE3& pose);

Mat3 skew(const Vec3& v);
Mat3 so3_exp(const Vec3& omega);
Vec3 so3_log(const Mat3& rotation);

/// Largest absolute entry of RᵀR − I.
double orthonormality_error(const Mat3& rotation);
/// Gram–Schmidt on the columns, keeping the first column's direction.
Mat3 orthonormalize(const Mat3& rotation);

inline PoseSE3 make_pose(const Mat3& r, const Vec3& t) { return {r, t}; }
Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

}  // namespace lilo
