// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_COVARIANCE_HPP
#define LIO_COVARIANCE_HPP

#include <Eigen/Eigenvalues>
#include <string>
#include <vector>

#include "lio/errors.hpp"
#include "lio/geometry.hpp"
#include "lio/kdtree.hpp"
#include "lio/point_cloud.hpp"

namespace lio {

/// Per-point 3x3 covariances regularized to (1, 1, epsilon) eigenvalues:
/// locally planar distributions with low uncertainty along the normal.
struct PointCovariances {
  std::vector<Mat3> cov;
  double epsilon = 1e-3;

  std::size_t size() const { return cov.size(); }
};

/// Estimate per-point covariances from the k-NN scatter (the query point is
/// one of its own neighbors), then replace the eigenvalues with (1, 1, eps)
/// keeping the eigenvectors. The smallest-eigenvalue direction is the local
/// surface normal.
inline PointCovariances estimate_covariances(const StampedPointCloud& cloud,
                                             const KdTree& index,
                                             int k_neighbors,
                                             double epsilon = 1e-3) {
  if (static_cast<int>(cloud.size()) < k_neighbors) {
    throw DegenerateCloudError(
        "estimate_covariances: cloud has " + std::to_string(cloud.size()) +
        " points, needs at least " + std::to_string(k_neighbors));
  }
  PointCovariances out;
  out.epsilon = epsilon;
  out.cov.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto hits = index.knn(cloud.points[i].position, k_neighbors);
    Vec3 mean = Vec3::Zero();
    for (const auto& h : hits) mean += index.point(h.index);
    mean /= static_cast<double>(hits.size());
    Mat3 scatter = Mat3::Zero();
    for (const auto& h : hits) {
      const Vec3 d = index.point(h.index) - mean;
      scatter += d * d.transpose();
    }
    scatter /= static_cast<double>(hits.size());

    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    // Ascending eigenvalues: slot 0 is the normal direction.
    const Mat3 V = eig.eigenvectors();
    out.cov[i] = V * Vec3(epsilon, 1.0, 1.0).asDiagonal() * V.transpose();
  }
  return out;
}

inline PointCovariances estimate_covariances(const StampedPointCloud& cloud,
                                             int k_neighbors,
                                             double epsilon = 1e-3) {
  return estimate_covariances(cloud, KdTree(cloud), k_neighbors, epsilon);
}

}  // namespace lio

#endif  // LIO_COVARIANCE_HPP
