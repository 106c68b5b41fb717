// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_SIM_SENSORS_HPP
#define LIO_SIM_SENSORS_HPP

#include <random>
#include <vector>

#include "lio/errors.hpp"
#include "lio/imu.hpp"
#include "lio/point_cloud.hpp"
#include "lio/sim/trajectory.hpp"
#include "lio/sim/world.hpp"

namespace lio::sim {

struct LidarSpec {
  int channels = 16;
  int horizontal_steps = 256;
  double spin_hz = 10.0;
  double max_range = 40.0;
  double range_sigma = 0.0;
  double fov_low_deg = -22.5;
  double fov_high_deg = 22.5;

  double period() const { return 1.0 / spin_hz; }
};

struct ImuSpec {
  double rate_hz = 100.0;
  double accel_sigma = 0.0;
  double gyro_sigma = 0.0;
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
};

struct SensorSpec {
  LidarSpec lidar;
  ImuSpec imu;
  double gravity = 9.80665;
  double lidar_clock_offset = 0.0;  // sensor clock minus host clock
  double imu_clock_offset = 0.0;
};

/// 32-channel, 512-step, 10 Hz spinning sensor preset.
inline SensorSpec sensor_os1_32() {
  SensorSpec s;
  s.lidar.channels = 32;
  s.lidar.horizontal_steps = 512;
  s.lidar.spin_hz = 10.0;
  return s;
}

struct SimulatedScan {
  StampedPointCloud cloud;        // sensor frame, motion-distorted
  std::vector<Vec3> world_points; // exact hit points, deskew oracle
  double t_end = 0.0;
};

/// Cast one full revolution. Each azimuth column fires all channels
/// simultaneously from the true sensor pose at its firing time, so the
/// assembled sensor-frame cloud carries genuine motion distortion while the
/// world-frame hit list is the exact oracle.
inline SimulatedScan simulate_scan(const World& world,
                                   const AnalyticTrajectory& traj,
                                   const LidarSpec& spec, double t_start,
                                   std::mt19937_64& rng) {
  if (world.empty()) throw ContractViolation("simulate_scan: empty world");
  std::normal_distribution<double> noise(0.0, 1.0);
  SimulatedScan out;
  out.cloud.t_start = t_start;
  out.cloud.frame = Frame::lidar;
  out.t_end = t_start + spec.period();

  const double fov_low = spec.fov_low_deg * M_PI / 180.0;
  const double fov_high = spec.fov_high_deg * M_PI / 180.0;
  for (int col = 0; col < spec.horizontal_steps; ++col) {
    const double t_rel = spec.period() * col / spec.horizontal_steps;
    const RigidTransform pose = traj.pose_at(t_start + t_rel);
    const double azimuth = 2.0 * M_PI * col / spec.horizontal_steps;
    for (int ch = 0; ch < spec.channels; ++ch) {
      const double elevation =
          spec.channels == 1
              ? 0.0
              : fov_low + (fov_high - fov_low) * ch / (spec.channels - 1);
      const Vec3 dir_sensor(std::cos(elevation) * std::cos(azimuth),
                            std::cos(elevation) * std::sin(azimuth),
                            std::sin(elevation));
      const Vec3 dir_world = pose.rotation * dir_sensor;
      const auto hit = world.raycast(pose.translation, dir_world, spec.max_range);
      if (!hit.has_value()) continue;
      double dist = *hit;
      if (spec.range_sigma > 0.0) dist += spec.range_sigma * noise(rng);
      out.cloud.points.push_back({dist * dir_sensor, t_rel});
      out.world_points.push_back(pose.translation + dist * dir_world);
    }
  }
  if (out.cloud.empty()) {
    throw Error("simulate_scan: no returns at t=" + std::to_string(t_start));
  }
  return out;
}

/// IMU stream over (t0, t1]: specific force and body rates read off the
/// analytic trajectory, plus the configured constant biases and white noise.
inline std::vector<ImuSample> simulate_imu(const AnalyticTrajectory& traj,
                                           const ImuSpec& spec, double t0,
                                           double t1, double gravity,
                                           std::mt19937_64& rng) {
  if (t1 <= t0) throw ContractViolation("simulate_imu: t1 must exceed t0");
  std::normal_distribution<double> noise(0.0, 1.0);
  const Vec3 g_down(0.0, 0.0, -gravity);
  std::vector<ImuSample> out;
  const double dt = 1.0 / spec.rate_hz;
  for (int i = 1;; ++i) {
    const double t = t0 + i * dt;
    const Quat q = traj.orientation(t);
    Vec3 accel = q.conjugate() * (traj.acceleration(t) - g_down) + spec.accel_bias;
    Vec3 gyro = traj.angular_velocity_body(t) + spec.gyro_bias;
    if (spec.accel_sigma > 0.0) {
      accel += spec.accel_sigma * Vec3(noise(rng), noise(rng), noise(rng));
    }
    if (spec.gyro_sigma > 0.0) {
      gyro += spec.gyro_sigma * Vec3(noise(rng), noise(rng), noise(rng));
    }
    out.push_back(ImuSample{t, accel, gyro});
    if (t >= t1) break;
  }
  return out;
}

}  // namespace lio::sim

#endif  // LIO_SIM_SENSORS_HPP
