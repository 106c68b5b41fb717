// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_IO_MAP_EXPORT_HPP
#define LIO_IO_MAP_EXPORT_HPP

#include <cstdio>
#include <fstream>
#include <span>
#include <string>

#include "lio/errors.hpp"
#include "lio/keyframe.hpp"

namespace lio::io {

/// Concatenate the keyframe clouds, voxel-downsample at `leaf`, and write
/// plain "x y z" lines.
inline std::size_t export_map(std::span<const Keyframe> keyframes, double leaf,
                              const std::string& path) {
  if (keyframes.empty()) throw ContractViolation("export_map: no keyframes");
  StampedPointCloud merged;
  merged.frame = Frame::world;
  for (const Keyframe& kf : keyframes) {
    merged.points.insert(merged.points.end(), kf.cloud.points.begin(),
                         kf.cloud.points.end());
  }
  const StampedPointCloud map = voxel_downsample(merged, leaf);
  std::ofstream os(path);
  if (!os) throw Error("cannot open map for writing: " + path);
  char line[128];
  for (const Point& p : map.points) {
    std::snprintf(line, sizeof(line), "%.6f %.6f %.6f\n", p.position.x(),
                  p.position.y(), p.position.z());
    os << line;
  }
  if (!os) throw Error("write failure on map: " + path);
  return map.size();
}

}  // namespace lio::io

#endif  // LIO_IO_MAP_EXPORT_HPP
