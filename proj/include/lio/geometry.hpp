// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_GEOMETRY_HPP
#define LIO_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>

namespace lio {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Hamilton-convention quaternions throughout, scalar-first in all
/// constructors and file formats that spell components out.

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

/// Embed an angular rate as a pure quaternion (0, v).
inline Quat pure_quat(const Vec3& v) { return Quat(0.0, v.x(), v.y(), v.z()); }

/// Coefficient-wise sum; the result is generally not unit length.
inline Quat quat_add(const Quat& a, const Quat& b) {
  return Quat(a.w() + b.w(), a.x() + b.x(), a.y() + b.y(), a.z() + b.z());
}

inline Quat quat_scale(const Quat& q, double s) {
  return Quat(q.w() * s, q.x() * s, q.y() * s, q.z() * s);
}

inline Quat quat_normalized(const Quat& q) {
  const double n = q.norm();
  if (n == 0.0) return Quat::Identity();
  return Quat(q.w() / n, q.x() / n, q.y() / n, q.z() / n);
}

/// Resolve the double cover by forcing a nonnegative scalar part. Used at
/// comparison boundaries only; state is never canonicalized in place.
inline Quat quat_canonical(const Quat& q) {
  if (q.w() < 0.0) return Quat(-q.w(), -q.x(), -q.y(), -q.z());
  return q;
}

/// Geodesic angle between two orientations, in radians. The atan2 form stays
/// accurate for nearly identical inputs where acos of the dot product loses
/// half the mantissa.
inline double quat_angle(const Quat& a, const Quat& b) {
  const Quat e = a.conjugate() * b;
  const double vn = Vec3(e.x(), e.y(), e.z()).norm();
  return 2.0 * std::atan2(vn, std::abs(e.w()));
}

inline Quat so3_exp(const Vec3& phi) {
  const double theta = phi.norm();
  if (theta < 1e-12) {
    Quat q(1.0, 0.5 * phi.x(), 0.5 * phi.y(), 0.5 * phi.z());
    return quat_normalized(q);
  }
  const Vec3 axis = phi / theta;
  return Quat(Eigen::AngleAxisd(theta, axis));
}

inline Vec3 so3_log(const Quat& q_in) {
  const Quat q = quat_canonical(quat_normalized(q_in));
  const Vec3 v(q.x(), q.y(), q.z());
  const double vn = v.norm();
  if (vn < 1e-12) return 2.0 * v;
  const double theta = 2.0 * std::atan2(vn, q.w());
  return (theta / vn) * v;
}

/// Rigid body transform, rotation stored as a unit quaternion.
struct RigidTransform {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  RigidTransform() = default;
  RigidTransform(const Quat& q, const Vec3& t)
      : rotation(quat_normalized(q)), translation(t) {}

  static RigidTransform Identity() { return RigidTransform(); }

  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform operator*(const RigidTransform& other) const {
    return RigidTransform(rotation * other.rotation,
                          rotation * other.translation + translation);
  }

  RigidTransform inverse() const {
    const Quat qi = rotation.conjugate();
    return RigidTransform(qi, -(qi * translation));
  }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation.toRotationMatrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  bool isApprox(const RigidTransform& other, double tol = 1e-9) const {
    return translation.isApprox(other.translation, tol) &&
           quat_angle(rotation, other.rotation) < tol;
  }
};

// se(3) twists are ordered [translation; rotation] so that the
// translational block of a Gauss-Newton Hessian is the top-left 3x3.

namespace detail {

inline Mat3 so3_left_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 px = skew(phi);
  if (theta < 1e-6) {
    return Mat3::Identity() + 0.5 * px + (1.0 / 6.0) * px * px;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + ((1.0 - std::cos(theta)) / t2) * px +
         ((theta - std::sin(theta)) / (t2 * theta)) * px * px;
}

inline Mat3 so3_left_jacobian_inv(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 px = skew(phi);
  if (theta < 1e-6) {
    return Mat3::Identity() - 0.5 * px + (1.0 / 12.0) * px * px;
  }
  const double half = 0.5 * theta;
  const double cot = 1.0 / std::tan(half);
  return Mat3::Identity() - 0.5 * px +
         ((1.0 - half * cot) / (theta * theta)) * px * px;
}

}  // namespace detail

inline RigidTransform se3_exp(const Vec6& xi) {
  const Vec3 rho = xi.head<3>();
  const Vec3 phi = xi.tail<3>();
  return RigidTransform(so3_exp(phi), detail::so3_left_jacobian(phi) * rho);
}

inline Vec6 se3_log(const RigidTransform& T) {
  Vec6 xi;
  const Vec3 phi = so3_log(T.rotation);
  xi.tail<3>() = phi;
  xi.head<3>() = detail::so3_left_jacobian_inv(phi) * T.translation;
  return xi;
}

}  // namespace lio

#endif  // LIO_GEOMETRY_HPP
