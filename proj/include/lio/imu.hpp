// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_IMU_HPP
#define LIO_IMU_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "lio/errors.hpp"
#include "lio/geometry.hpp"

namespace lio {

struct ImuSample {
  double t = 0.0;       // host clock, seconds
  Vec3 accel = Vec3::Zero();  // m/s^2, specific force
  Vec3 gyro = Vec3::Zero();   // rad/s

  bool finite() const {
    return std::isfinite(t) && accel.allFinite() && gyro.allFinite();
  }
};

/// Extrinsics from the IMU housing to the robot center of gravity, plus the
/// local gravity magnitude.
struct ImuCalibration {
  Quat rotation = Quat::Identity();  // IMU axes -> robot axes
  Vec3 lever_arm = Vec3::Zero();     // displacement IMU -> center of gravity, robot frame
  double gravity = 9.80665;

  /// World-frame gravity acceleration (points down).
  Vec3 gravity_world() const { return Vec3(0.0, 0.0, -gravity); }
};

/// Full navigation state: pose, velocity and the two IMU biases.
struct StateVector {
  Vec3 p = Vec3::Zero();
  Quat q = Quat::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  double t = 0.0;

  RigidTransform pose() const { return RigidTransform(q, p); }
};

/// Subtract the current bias estimates. Gravity is not removed here; it is
/// handled in world frame during integration.
inline ImuSample debias(const ImuSample& sample, const StateVector& state) {
  return ImuSample{sample.t, sample.accel - state.accel_bias,
                   sample.gyro - state.gyro_bias};
}

/// Move a measurement from the IMU housing to the robot center of gravity.
///
/// The gyro only changes axes. The accelerometer picks up the Euler term
/// (angular acceleration x lever arm) and the centripetal term
/// (omega x (omega x lever arm)); angular acceleration comes from a backward
/// difference against `prev` (the previous raw sample) and is zero when no
/// predecessor exists.
inline ImuSample transfer_to_body(const ImuSample& sample,
                                  const ImuCalibration& calib,
                                  const ImuSample* prev = nullptr) {
  if (!sample.finite()) {
    throw ContractViolation("transfer_to_body: non-finite sample at t=" +
                            std::to_string(sample.t));
  }
  const Vec3 gyro_r = calib.rotation * sample.gyro;
  Vec3 alpha = Vec3::Zero();
  if (prev != nullptr) {
    const double dt = sample.t - prev->t;
    if (dt <= 0.0) {
      throw StreamOrderError("transfer_to_body: non-increasing IMU timestamps");
    }
    alpha = (gyro_r - calib.rotation * prev->gyro) / dt;
  }
  const Vec3& r = calib.lever_arm;
  const Vec3 accel_r = calib.rotation * sample.accel + alpha.cross(r) +
                       gyro_r.cross(gyro_r.cross(r));
  return ImuSample{sample.t, accel_r, gyro_r};
}

namespace detail {

/// Byproducts of one integration step, cached by the deskewing trajectory.
struct ImuStepDetail {
  Vec3 world_accel_prev = Vec3::Zero();  // gravity-free, at the step start
  Vec3 world_accel_cur = Vec3::Zero();   // gravity-free, at the step end
  Vec3 jerk = Vec3::Zero();
  Vec3 ang_accel = Vec3::Zero();
};

/// One step of the constant-jerk / constant-angular-acceleration kinematics.
///
/// `prev` supplies the left-edge measurement of the interval. When
/// `bootstrap` is set (no real predecessor) jerk and angular acceleration
/// are zero for the step. Biases pass through untouched; inputs are assumed
/// debiased and frame-transferred.
inline StateVector integrate_step(const StateVector& state,
                                  const ImuSample& prev,
                                  const ImuSample& cur, const Vec3& gravity,
                                  bool bootstrap,
                                  ImuStepDetail* detail = nullptr) {
  const double dt = cur.t - state.t;
  if (dt <= 0.0) {
    throw StreamOrderError("integrate_step: non-increasing timestamps (" +
                           std::to_string(state.t) + " -> " +
                           std::to_string(cur.t) + ")");
  }

  // Attitude first: it only depends on step-start quantities, and the jerk
  // below needs the end-of-step orientation.
  const Vec3 ang_accel =
      bootstrap ? Vec3(Vec3::Zero()) : Vec3((cur.gyro - prev.gyro) / dt);
  Quat q = quat_add(
      state.q,
      quat_add(quat_scale(state.q * pure_quat(prev.gyro), 0.5 * dt),
               quat_scale(state.q * pure_quat(ang_accel), 0.25 * dt * dt)));
  q = quat_normalized(q);

  const Vec3 accel_w_prev = state.q * prev.accel + gravity;
  const Vec3 accel_w_cur = q * cur.accel + gravity;
  const Vec3 jerk = bootstrap ? Vec3(Vec3::Zero())
                              : Vec3((accel_w_cur - accel_w_prev) / dt);

  StateVector out = state;
  out.q = q;
  out.p = state.p + state.v * dt + 0.5 * accel_w_prev * dt * dt +
          (1.0 / 6.0) * jerk * dt * dt * dt;
  out.v = state.v + accel_w_prev * dt;
  out.t = cur.t;

  if (detail != nullptr) {
    detail->world_accel_prev = accel_w_prev;
    detail->world_accel_cur = accel_w_cur;
    detail->jerk = jerk;
    detail->ang_accel = ang_accel;
  }
  return out;
}

}  // namespace detail

/// Integrate a time-ordered, preprocessed IMU stream from `state0`,
/// producing one state per sample. Empty input returns {state0}.
inline std::vector<StateVector> integrate_discrete(
    const StateVector& state0, std::span<const ImuSample> samples,
    const ImuCalibration& calib) {
  std::vector<StateVector> out;
  if (samples.empty()) {
    out.push_back(state0);
    return out;
  }
  if (samples.front().t < state0.t) {
    throw StreamOrderError("integrate_discrete: first sample predates state0");
  }
  const Vec3 g = calib.gravity_world();
  out.reserve(samples.size());
  StateVector state = state0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i == 0 && samples[0].t == state0.t) {
      // A sample exactly at the seed time carries no motion; it only
      // provides the left-edge measurement for the next step.
      out.push_back(state0);
      continue;
    }
    const bool bootstrap = (i == 0);
    const ImuSample& prev = bootstrap ? samples[0] : samples[i - 1];
    state = detail::integrate_step(state, prev, samples[i], g, bootstrap);
    out.push_back(state);
  }
  return out;
}

}  // namespace lio

#endif  // LIO_IMU_HPP
