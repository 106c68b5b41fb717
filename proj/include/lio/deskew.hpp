// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_DESKEW_HPP
#define LIO_DESKEW_HPP

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "lio/errors.hpp"
#include "lio/geometry.hpp"
#include "lio/imu.hpp"
#include "lio/point_cloud.hpp"

namespace lio {

/// One sample of the coarse discrete-time trajectory plus the cached
/// derivative terms needed to evaluate the closed-form motion between this
/// knot and the next.
struct TrajectoryKnot {
  double t = 0.0;
  StateVector state;
  Vec3 gyro = Vec3::Zero();         // body rate at the knot (left edge)
  Vec3 world_accel = Vec3::Zero();  // gravity-free world acceleration
  Vec3 jerk = Vec3::Zero();         // constant over [this, next]
  Vec3 ang_accel = Vec3::Zero();    // constant over [this, next]
};

/// Coarse trajectory over one sweep, immutable after construction.
/// Continuous-time poses are recovered from the nearest preceding knot.
class CoarseTrajectory {
 public:
  CoarseTrajectory() = default;
  explicit CoarseTrajectory(std::vector<TrajectoryKnot> knots)
      : knots_(std::move(knots)) {}

  const std::vector<TrajectoryKnot>& knots() const { return knots_; }
  double t_begin() const { return knots_.front().t; }
  double t_end() const { return knots_.back().t; }

  /// Closed-form pose at time t, from the nearest preceding knot.
  RigidTransform query_pose(double t) const {
    const TrajectoryKnot& k = preceding(t);
    const double tau = t - k.t;
    return RigidTransform(orientation_at(k, tau), position_at(k, tau));
  }

  /// Full state at time t; velocity follows the same kinematic model,
  /// biases are carried through from the knot.
  StateVector query_state(double t) const {
    const TrajectoryKnot& k = preceding(t);
    const double tau = t - k.t;
    StateVector s = k.state;
    s.p = position_at(k, tau);
    s.q = orientation_at(k, tau);
    s.v = k.state.v + k.world_accel * tau;
    s.t = t;
    return s;
  }

 private:
  const TrajectoryKnot& preceding(double t) const {
    if (knots_.empty()) throw OutOfRangeError("query on empty trajectory");
    if (t < knots_.front().t || t > knots_.back().t) {
      throw OutOfRangeError("query time " + std::to_string(t) +
                            " outside trajectory span [" +
                            std::to_string(knots_.front().t) + ", " +
                            std::to_string(knots_.back().t) + "]");
    }
    auto it = std::upper_bound(
        knots_.begin(), knots_.end(), t,
        [](double value, const TrajectoryKnot& k) { return value < k.t; });
    return *std::prev(it);
  }

  static Vec3 position_at(const TrajectoryKnot& k, double tau) {
    return k.state.p + k.state.v * tau + 0.5 * k.world_accel * tau * tau +
           (1.0 / 6.0) * k.jerk * tau * tau * tau;
  }

  static Quat orientation_at(const TrajectoryKnot& k, double tau) {
    const Quat& q = k.state.q;
    if (tau == 0.0) return q;  // exact at the knot itself
    return quat_normalized(quat_add(
        q, quat_add(quat_scale(q * pure_quat(k.gyro), 0.5 * tau),
                    quat_scale(q * pure_quat(k.ang_accel), 0.25 * tau * tau))));
  }

  std::vector<TrajectoryKnot> knots_;
};

/// Integrate preprocessed IMU samples from `state0` into a knot sequence
/// covering [state0.t, scan_end]. Knot states are produced by the same step
/// kernel as integrate_discrete, so they match it exactly.
inline CoarseTrajectory build_coarse_trajectory(const StateVector& state0,
                                                std::span<const ImuSample> samples,
                                                double scan_end,
                                                const ImuCalibration& calib) {
  if (samples.empty() || samples.back().t < scan_end) {
    const double have = samples.empty() ? state0.t : samples.back().t;
    throw InsufficientImuError(
        "IMU stream ends at " + std::to_string(have) +
        " but the scan needs coverage through " + std::to_string(scan_end));
  }
  if (samples.front().t < state0.t) {
    throw StreamOrderError("build_coarse_trajectory: sample predates state0");
  }

  const Vec3 g = calib.gravity_world();
  std::vector<TrajectoryKnot> knots;
  knots.reserve(samples.size() + 1);

  TrajectoryKnot seed;
  seed.t = state0.t;
  seed.state = state0;
  seed.gyro = samples[0].gyro;
  seed.world_accel = state0.q * samples[0].accel + g;
  knots.push_back(seed);

  StateVector state = state0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i == 0 && samples[0].t == state0.t) continue;  // seed knot covers it
    const bool bootstrap = (i == 0);
    const ImuSample& prev = bootstrap ? samples[0] : samples[i - 1];
    detail::ImuStepDetail d;
    state = detail::integrate_step(state, prev, samples[i], g, bootstrap, &d);

    TrajectoryKnot& left = knots.back();
    left.gyro = prev.gyro;
    left.world_accel = d.world_accel_prev;
    left.jerk = d.jerk;
    left.ang_accel = d.ang_accel;

    TrajectoryKnot next;
    next.t = samples[i].t;
    next.state = state;
    next.gyro = samples[i].gyro;
    next.world_accel = d.world_accel_cur;
    knots.push_back(next);
  }
  return CoarseTrajectory(std::move(knots));
}

/// Motion-correct a robot-frame sweep: every point is mapped through the
/// pose at its own firing time, yielding a world-frame cloud that already
/// carries the registration prior. Per-point transforms are independent, so
/// the output does not depend on evaluation order or partitioning.
inline StampedPointCloud deskew(const StampedPointCloud& cloud,
                                const CoarseTrajectory& traj) {
  if (cloud.frame != Frame::robot) {
    throw ContractViolation("deskew expects a robot-frame cloud");
  }
  StampedPointCloud out;
  out.t_start = cloud.t_start;
  out.frame = Frame::world;
  out.points.resize(cloud.points.size());
  for (std::size_t n = 0; n < cloud.points.size(); ++n) {
    const Point& p = cloud.points[n];
    try {
      const RigidTransform T = traj.query_pose(cloud.t_start + p.t_rel);
      out.points[n] = Point{T * p.position, p.t_rel};
    } catch (const OutOfRangeError& e) {
      throw OutOfRangeError("deskew: point " + std::to_string(n) + ": " +
                            e.what());
    }
  }
  return out;
}

}  // namespace lio

#endif  // LIO_DESKEW_HPP
