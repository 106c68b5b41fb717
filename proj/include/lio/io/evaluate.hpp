// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_IO_EVALUATE_HPP
#define LIO_IO_EVALUATE_HPP

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lio/errors.hpp"
#include "lio/io/tum.hpp"

namespace lio::io {

struct AteResult {
  double rmse = 0.0;
  double mean = 0.0;
  double max = 0.0;
  int pairs = 0;
};

namespace detail {

/// Nearest-timestamp association within the tolerance, both streams
/// assumed time-ordered.
inline std::vector<std::pair<int, int>> associate(const TrajectoryRecord& a,
                                                  const TrajectoryRecord& b,
                                                  double tolerance) {
  std::vector<std::pair<int, int>> out;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.poses.size(); ++i) {
    while (j + 1 < b.poses.size() &&
           std::abs(b.poses[j + 1].t - a.poses[i].t) <=
               std::abs(b.poses[j].t - a.poses[i].t)) {
      ++j;
    }
    if (!b.poses.empty() &&
        std::abs(b.poses[j].t - a.poses[i].t) <= tolerance) {
      out.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return out;
}

}  // namespace detail

/// Absolute trajectory error after rigid (scale = 1) Umeyama alignment of
/// the associated translations. Needs at least three associated pairs.
inline AteResult evaluate_ate(const TrajectoryRecord& estimate,
                              const TrajectoryRecord& truth,
                              double association_tolerance = 0.02) {
  const auto pairs = detail::associate(estimate, truth, association_tolerance);
  if (pairs.size() < 3) {
    throw Error("evaluate_ate: only " + std::to_string(pairs.size()) +
                " associated pose pairs (need 3)");
  }
  Eigen::Matrix3Xd src(3, pairs.size()), dst(3, pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    src.col(k) = estimate.poses[pairs[k].first].p;
    dst.col(k) = truth.poses[pairs[k].second].p;
  }
  const Eigen::Matrix4d T = Eigen::umeyama(src, dst, /*with_scaling=*/false);
  const Mat3 R = T.topLeftCorner<3, 3>();
  const Vec3 t = T.topRightCorner<3, 1>();

  AteResult out;
  out.pairs = static_cast<int>(pairs.size());
  double sq = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double e = (R * src.col(k) + t - dst.col(k)).norm();
    sq += e * e;
    out.mean += e;
    out.max = std::max(out.max, e);
  }
  out.rmse = std::sqrt(sq / pairs.size());
  out.mean /= static_cast<double>(pairs.size());
  return out;
}

}  // namespace lio::io

#endif  // LIO_IO_EVALUATE_HPP
