// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_SIM_TRAJECTORY_HPP
#define LIO_SIM_TRAJECTORY_HPP

#include <cmath>
#include <functional>

#include "lio/geometry.hpp"
#include "lio/imu.hpp"

namespace lio::sim {

/// Closed-form trajectory with exact derivatives, C2 on its domain.
struct AnalyticTrajectory {
  std::function<Vec3(double)> position;
  std::function<Vec3(double)> velocity;
  std::function<Vec3(double)> acceleration;          // world frame
  std::function<Quat(double)> orientation;
  std::function<Vec3(double)> angular_velocity_body;

  RigidTransform pose_at(double t) const {
    return RigidTransform(orientation(t), position(t));
  }

  StateVector state_at(double t) const {
    StateVector s;
    s.p = position(t);
    s.q = orientation(t);
    s.v = velocity(t);
    s.t = t;
    return s;
  }
};

inline AnalyticTrajectory traj_static(const RigidTransform& pose) {
  AnalyticTrajectory t;
  t.position = [pose](double) { return pose.translation; };
  t.velocity = [](double) { return Vec3::Zero(); };
  t.acceleration = [](double) { return Vec3::Zero(); };
  t.orientation = [pose](double) { return pose.rotation; };
  t.angular_velocity_body = [](double) { return Vec3::Zero(); };
  return t;
}

inline AnalyticTrajectory traj_constant_velocity(const Vec3& start,
                                                 const Vec3& velocity,
                                                 const Quat& heading = Quat::Identity()) {
  AnalyticTrajectory t;
  t.position = [=](double s) { return Vec3(start + velocity * s); };
  t.velocity = [=](double) { return velocity; };
  t.acceleration = [](double) { return Vec3::Zero(); };
  t.orientation = [=](double) { return heading; };
  t.angular_velocity_body = [](double) { return Vec3::Zero(); };
  return t;
}

/// Sinusoidal translation on all axes plus a fixed-axis sinusoidal rotation.
/// Acceleration vanishes at t = 0 and the motion is periodic in 1/freq.
inline AnalyticTrajectory traj_sinusoid(const Vec3& center, const Vec3& amp,
                                        double freq, const Vec3& rot_axis,
                                        double rot_amp, double rot_freq) {
  const Vec3 axis = rot_axis.normalized();
  AnalyticTrajectory t;
  const double w = 2.0 * M_PI * freq;
  const double wr = 2.0 * M_PI * rot_freq;
  t.position = [=](double s) { return Vec3(center + amp * std::sin(w * s)); };
  t.velocity = [=](double s) { return Vec3(amp * w * std::cos(w * s)); };
  t.acceleration = [=](double s) { return Vec3(-amp * w * w * std::sin(w * s)); };
  t.orientation = [=](double s) { return so3_exp(axis * rot_amp * std::sin(wr * s)); };
  t.angular_velocity_body = [=](double s) {
    return Vec3(axis * rot_amp * wr * std::cos(wr * s));
  };
  return t;
}

/// Constant-rate yaw spin in place; `rate` up to the aggressive 3.5 rad/s.
inline AnalyticTrajectory traj_spin(const Vec3& at, double rate) {
  AnalyticTrajectory t;
  t.position = [=](double) { return at; };
  t.velocity = [](double) { return Vec3::Zero(); };
  t.acceleration = [](double) { return Vec3::Zero(); };
  t.orientation = [=](double s) { return so3_exp(Vec3(0, 0, rate * s)); };
  t.angular_velocity_body = [=](double) { return Vec3(0, 0, rate); };
  return t;
}

/// Circle of the given radius about `center`, tangent heading, constant
/// angular rate.
inline AnalyticTrajectory traj_circle(const Vec3& center, double radius,
                                      double angular_rate, double phase = 0.0) {
  AnalyticTrajectory t;
  t.position = [=](double s) {
    const double a = angular_rate * s + phase;
    return Vec3(center + radius * Vec3(std::cos(a), std::sin(a), 0));
  };
  t.velocity = [=](double s) {
    const double a = angular_rate * s + phase;
    return Vec3(radius * angular_rate * Vec3(-std::sin(a), std::cos(a), 0));
  };
  t.acceleration = [=](double s) {
    const double a = angular_rate * s + phase;
    return Vec3(-radius * angular_rate * angular_rate *
                Vec3(std::cos(a), std::sin(a), 0));
  };
  t.orientation = [=](double s) {
    return so3_exp(Vec3(0, 0, angular_rate * s + phase + M_PI / 2));
  };
  t.angular_velocity_body = [=](double) { return Vec3(0, 0, angular_rate); };
  return t;
}

/// Rising helix, used to climb through the stairwell opening.
inline AnalyticTrajectory traj_helix(const Vec3& center, double radius,
                                     double angular_rate, double climb_rate,
                                     double z0, double phase = 0.0) {
  AnalyticTrajectory t;
  t.position = [=](double s) {
    const double a = angular_rate * s + phase;
    return Vec3(center.x() + radius * std::cos(a),
                center.y() + radius * std::sin(a), z0 + climb_rate * s);
  };
  t.velocity = [=](double s) {
    const double a = angular_rate * s + phase;
    return Vec3(-radius * angular_rate * std::sin(a),
                radius * angular_rate * std::cos(a), climb_rate);
  };
  t.acceleration = [=](double s) {
    const double a = angular_rate * s + phase;
    return Vec3(-radius * angular_rate * angular_rate * std::cos(a),
                -radius * angular_rate * angular_rate * std::sin(a), 0.0);
  };
  t.orientation = [=](double s) {
    return so3_exp(Vec3(0, 0, angular_rate * s + phase + M_PI / 2));
  };
  t.angular_velocity_body = [=](double) { return Vec3(0, 0, angular_rate); };
  return t;
}

}  // namespace lio::sim

#endif  // LIO_SIM_TRAJECTORY_HPP
