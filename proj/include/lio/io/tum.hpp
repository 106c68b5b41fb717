// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_IO_TUM_HPP
#define LIO_IO_TUM_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lio/errors.hpp"
#include "lio/geometry.hpp"

namespace lio::io {

struct TumPose {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Quat q = Quat::Identity();
};

/// Trajectory in TUM line layout: "timestamp tx ty tz qx qy qz qw",
/// one pose per line, timestamps strictly increasing.
struct TrajectoryRecord {
  std::vector<TumPose> poses;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
};

inline std::string tum_line(const TumPose& pose) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.6f %.9g %.9g %.9g %.9g %.9g %.9g %.9g",
                pose.t, pose.p.x(), pose.p.y(), pose.p.z(), pose.q.x(),
                pose.q.y(), pose.q.z(), pose.q.w());
  return buf;
}

inline void save_tum(const std::string& path, const TrajectoryRecord& traj) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open trajectory for writing: " + path);
  for (const TumPose& pose : traj.poses) os << tum_line(pose) << "\n";
  if (!os) throw Error("write failure on trajectory: " + path);
}

inline TrajectoryRecord load_tum(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open trajectory: " + path);
  TrajectoryRecord out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    TumPose pose;
    double qx, qy, qz, qw;
    if (!(ss >> pose.t >> pose.p.x() >> pose.p.y() >> pose.p.z() >> qx >> qy >>
          qz >> qw)) {
      throw ParseError("trajectory line " + std::to_string(line_no) +
                       ": expected 8 fields");
    }
    pose.q = quat_normalized(Quat(qw, qx, qy, qz));
    if (!out.poses.empty() && pose.t <= out.poses.back().t) {
      throw ParseError("trajectory line " + std::to_string(line_no) +
                       ": non-increasing timestamp");
    }
    out.poses.push_back(pose);
  }
  return out;
}

}  // namespace lio::io

#endif  // LIO_IO_TUM_HPP
