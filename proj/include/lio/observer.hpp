// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_OBSERVER_HPP
#define LIO_OBSERVER_HPP

#include <cmath>

#include "lio/errors.hpp"
#include "lio/geometry.hpp"
#include "lio/imu.hpp"

namespace lio {

/// Positive gains of the hierarchical geometric observer. Defaults are tuned
/// so the closed-loop convergence suite passes with margin.
struct ObserverGains {
  double attitude = 8.0;     // gamma_1
  double gyro_bias = 6.0;    // gamma_2
  double position = 10.0;    // gamma_3
  double velocity = 30.0;    // gamma_4
  double accel_bias = 16.0;  // gamma_5
};

/// Error between a propagated state and a measured pose.
struct PoseError {
  Quat q_e = Quat::Identity();  // conj(q_propagated) * q_measured
  Vec3 p_e = Vec3::Zero();      // p_measured - p_propagated

  static PoseError between(const StateVector& state,
                           const RigidTransform& measured) {
    return PoseError{state.q.conjugate() * measured.rotation,
                     measured.translation - state.p};
  }
};

/// One IMU-rate prediction step. `prev` is the previous preprocessed sample
/// when one exists; without it the jerk and angular-acceleration terms are
/// zero. Biases pass through unchanged.
inline StateVector propagate(const StateVector& state, const ImuSample& sample,
                             const ImuSample* prev = nullptr,
                             const Vec3& gravity_world = Vec3(0, 0, -9.80665)) {
  if (sample.t <= state.t) {
    throw StreamOrderError("observer propagate: sample does not advance time");
  }
  return detail::integrate_step(state, prev != nullptr ? *prev : sample, sample,
                                gravity_world, prev == nullptr);
}

/// Measurement update. The attitude correction is computed and applied in
/// full before the translational one; perturbing the translation error can
/// never change the attitude or gyro-bias outputs.
inline StateVector update(const StateVector& state,
                          const RigidTransform& measured, double dt_plus,
                          const ObserverGains& gains) {
  if (dt_plus <= 0.0) {
    throw ContractViolation("observer update: dt_plus must be > 0");
  }
  const PoseError err = PoseError::between(state, measured);
  const double sgn = err.q_e.w() < 0.0 ? -1.0 : 1.0;  // sgn(0) := +1
  const Vec3 q_vec(err.q_e.x(), err.q_e.y(), err.q_e.z());

  StateVector out = state;

  // Attitude hierarchy first (Eq. 12 shape).
  const Quat correction(1.0 - std::abs(err.q_e.w()), sgn * q_vec.x(),
                        sgn * q_vec.y(), sgn * q_vec.z());
  out.q = quat_normalized(quat_add(
      state.q, quat_scale(state.q * correction, dt_plus * gains.attitude)));
  out.gyro_bias =
      state.gyro_bias - dt_plus * gains.gyro_bias * err.q_e.w() * q_vec;

  // Translational updates use the already-updated attitude.
  out.p = state.p + dt_plus * gains.position * err.p_e;
  out.v = state.v + dt_plus * gains.velocity * err.p_e;
  out.accel_bias = state.accel_bias - dt_plus * gains.accel_bias *
                                          (out.q.conjugate() * err.p_e);
  return out;
}

}  // namespace lio

#endif  // LIO_OBSERVER_HPP
