// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_POINT_CLOUD_HPP
#define LIO_POINT_CLOUD_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "lio/errors.hpp"
#include "lio/geometry.hpp"

namespace lio {

enum class Frame { lidar, robot, world };

/// One return with its firing time relative to the start of the sweep.
struct Point {
  Vec3 position = Vec3::Zero();
  double t_rel = 0.0;  // seconds since sweep start; >= 0, < sweep period
};

/// A single sweep. Point order is acquisition order; t_rel is not assumed
/// monotone because spinning sensors interleave channels.
struct StampedPointCloud {
  std::vector<Point> points;
  double t_start = 0.0;  // host clock, seconds
  Frame frame = Frame::lidar;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Apply p' = R p + t to every point. Timestamps, order and t_start are
/// preserved; the caller owns the frame tag of the result.
inline StampedPointCloud transform_cloud(const StampedPointCloud& cloud,
                                         const RigidTransform& T,
                                         Frame out_frame) {
  StampedPointCloud out;
  out.t_start = cloud.t_start;
  out.frame = out_frame;
  out.points.reserve(cloud.points.size());
  for (const Point& p : cloud.points) {
    out.points.push_back(Point{T * p.position, p.t_rel});
  }
  return out;
}

inline StampedPointCloud transform_cloud(const StampedPointCloud& cloud,
                                         const RigidTransform& T) {
  return transform_cloud(cloud, T, cloud.frame);
}

namespace detail {

struct CellHash {
  std::size_t operator()(const std::array<std::int64_t, 3>& c) const {
    // FNV-style mix of the three cell coordinates.
    std::size_t h = 1469598103934665603ull;
    for (std::int64_t v : c) {
      h ^= static_cast<std::size_t>(v);
      h *= 1099511628211ull;
    }
    return h;
  }
};

inline std::array<std::int64_t, 3> voxel_cell(const Vec3& p, double leaf) {
  return {static_cast<std::int64_t>(std::floor(p.x() / leaf)),
          static_cast<std::int64_t>(std::floor(p.y() / leaf)),
          static_cast<std::int64_t>(std::floor(p.z() / leaf))};
}

}  // namespace detail

/// Keep at most one point per leaf^3 cell. The survivor is the first point
/// that arrived in the cell so it keeps a real acquisition timestamp.
inline StampedPointCloud voxel_downsample(const StampedPointCloud& cloud,
                                          double leaf) {
  if (leaf <= 0.0) throw ContractViolation("voxel_downsample: leaf must be > 0");
  StampedPointCloud out;
  out.t_start = cloud.t_start;
  out.frame = cloud.frame;
  std::unordered_set<std::array<std::int64_t, 3>, detail::CellHash> seen;
  seen.reserve(cloud.points.size());
  for (const Point& p : cloud.points) {
    if (seen.insert(detail::voxel_cell(p.position, leaf)).second) {
      out.points.push_back(p);
    }
  }
  return out;
}

/// Drop points inside an axis-aligned cube of the given half extent around
/// the origin (self-returns from the robot body).
inline StampedPointCloud box_filter(const StampedPointCloud& cloud,
                                    double half_extent) {
  StampedPointCloud out;
  out.t_start = cloud.t_start;
  out.frame = cloud.frame;
  out.points.reserve(cloud.points.size());
  for (const Point& p : cloud.points) {
    const Vec3& v = p.position;
    if (std::abs(v.x()) <= half_extent && std::abs(v.y()) <= half_extent &&
        std::abs(v.z()) <= half_extent) {
      continue;
    }
    out.points.push_back(p);
  }
  return out;
}

}  // namespace lio

#endif  // LIO_POINT_CLOUD_HPP
