// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_GICP_HPP
#define LIO_GICP_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <limits>
#include <string>
#include <vector>

#include "lio/covariance.hpp"
#include "lio/errors.hpp"
#include "lio/geometry.hpp"
#include "lio/kdtree.hpp"
#include "lio/point_cloud.hpp"

namespace lio {

/// Filtered per-point sparsity of the incoming scans: the mean distance to
/// the K nearest neighbors, averaged over the cloud, low-pass filtered. The
/// pipeline feeds it to the matcher as the maximum correspondence distance.
struct SparsityTracker {
  double z = 0.0;
  bool initialized = false;
  bool warned_small_cloud = false;
  double alpha = 0.95;
  double beta = 0.05;
  int k_neighbors = 5;

  /// Mean over points of the mean distance to the K nearest neighbors.
  double measure(const StampedPointCloud& cloud, const KdTree& index) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto hits =
          index.knn(cloud.points[i].position, k_neighbors + 1);  // self + K
      double per_point = 0.0;
      int used = 0;
      for (const auto& h : hits) {
        if (h.index == static_cast<int>(i)) continue;
        per_point += h.distance;
        ++used;
      }
      sum += per_point / static_cast<double>(used);
    }
    return sum / static_cast<double>(cloud.size());
  }

  /// Returns false (tracker unchanged, warning flag set) for clouds smaller
  /// than K+1 points.
  bool update(const StampedPointCloud& cloud, const KdTree& index) {
    if (static_cast<int>(cloud.size()) < k_neighbors + 1) {
      warned_small_cloud = true;
      return false;
    }
    const double d = measure(cloud, index);
    z = initialized ? alpha * z + beta * d : d;
    initialized = true;
    return true;
  }

  bool update(const StampedPointCloud& cloud) {
    if (static_cast<int>(cloud.size()) < k_neighbors + 1) {
      warned_small_cloud = true;
      return false;
    }
    return update(cloud, KdTree(cloud));
  }
};

/// Registration target: a cloud with covariances and a prebuilt index.
/// Submaps convert to this view.
struct RegistrationTarget {
  const StampedPointCloud* cloud = nullptr;
  const std::vector<Mat3>* covariances = nullptr;
  const KdTree* index = nullptr;
};

struct GicpParams {
  int max_iterations = 64;
  double update_tolerance = 1e-8;        // twist norm
  double residual_rel_tolerance = 1e-9;  // relative residual change
  int min_correspondences = 20;
  double levenberg_init = 1e-6;
};

struct RegistrationResult {
  RigidTransform correction;    // optimal alignment on top of the prior
  RigidTransform refined_pose;  // correction * prior
  double residual = 0.0;        // Mahalanobis objective at the solution
  double fitness = 0.0;         // mean Euclidean correspondence distance
  int correspondences = 0;
  Mat6 hessian = Mat6::Zero();  // J^T M J at the solution
  Mat3 hessian_tt = Mat3::Zero();
  bool converged = false;
  int iterations = 0;
  /// (before, after) objective per accepted iteration, on that iteration's
  /// correspondence set. Damping rejects increases.
  std::vector<std::pair<double, double>> residual_history;
};

/// Ratio of extreme eigenvalue magnitudes of a symmetric PSD matrix;
/// infinity when the smallest eigenvalue is zero.
inline double condition_number(const Mat3& h_tt) {
  if ((h_tt - h_tt.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ContractViolation("condition_number: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(h_tt);
  const double lo = std::abs(eig.eigenvalues()(0));
  const double hi = std::abs(eig.eigenvalues()(2));
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

namespace detail {

struct Correspondence {
  int source = 0;
  int target = 0;
};

inline std::vector<Correspondence> find_correspondences(
    const StampedPointCloud& source, const RigidTransform& T,
    const RegistrationTarget& target, double max_corr) {
  std::vector<Correspondence> out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3 p = T * source.points[i].position;
    const KdTree::Hit hit = target.index->nearest_within(p, max_corr);
    if (hit.index >= 0) out.push_back({static_cast<int>(i), hit.index});
  }
  return out;
}

/// Normal equations of the plane-to-plane objective on a fixed
/// correspondence set. The gradient of the objective is 2*b.
struct GicpLinearization {
  std::vector<Mat3> weights;  // (C_S + R C_P R^T)^-1 per correspondence
  double objective = 0.0;
  Mat6 H = Mat6::Zero();
  Vec6 b = Vec6::Zero();
};

inline GicpLinearization linearize(const StampedPointCloud& source,
                                   const PointCovariances& source_cov,
                                   const RegistrationTarget& target,
                                   const std::vector<Correspondence>& corr,
                                   const RigidTransform& at) {
  GicpLinearization lin;
  lin.weights.reserve(corr.size());
  const Mat3 R = at.rotation.toRotationMatrix();
  for (const auto& c : corr) {
    const Vec3& p = source.points[c.source].position;
    const Mat3 M = ((*target.covariances)[c.target] +
                    R * source_cov.cov[c.source] * R.transpose())
                       .inverse();
    lin.weights.push_back(M);
    const Vec3 d = target.cloud->points[c.target].position - at * p;
    Eigen::Matrix<double, 3, 6> J;
    J.leftCols<3>() = -R;
    J.rightCols<3>() = R * skew(p);
    lin.objective += d.dot(M * d);
    lin.H += J.transpose() * M * J;
    lin.b += J.transpose() * M * d;
  }
  return lin;
}

/// Objective on a fixed correspondence set with frozen weights; this is the
/// function the solver's step acceptance and the finite-difference oracle
/// both evaluate.
inline double frozen_objective(const StampedPointCloud& source,
                               const RegistrationTarget& target,
                               const std::vector<Correspondence>& corr,
                               const std::vector<Mat3>& weights,
                               const RigidTransform& at) {
  double e = 0.0;
  for (std::size_t k = 0; k < corr.size(); ++k) {
    const Vec3 d = target.cloud->points[corr[k].target].position -
                   at * source.points[corr[k].source].position;
    e += d.dot(weights[k] * d);
  }
  return e;
}

}  // namespace detail

/// Plane-to-plane registration of a prior-transformed source cloud against a
/// fixed target. Gauss-Newton with Levenberg damping over a right-multiplied
/// se(3) twist; correspondences are re-sought every accepted iteration. The
/// returned pose is correction * prior.
inline RegistrationResult register_clouds(const StampedPointCloud& source,
                                          const PointCovariances& source_cov,
                                          const RegistrationTarget& target,
                                          const RigidTransform& prior,
                                          double max_corr,
                                          const GicpParams& params = {}) {
  if (target.cloud == nullptr || target.index == nullptr ||
      target.covariances == nullptr) {
    throw ContractViolation("register_clouds: incomplete target");
  }
  if (target.cloud->size() < 50) {
    throw ContractViolation("register_clouds: target smaller than 50 points");
  }
  if (max_corr <= 0.0) {
    throw ContractViolation("register_clouds: max_corr must be > 0");
  }
  if (source_cov.size() != source.size()) {
    throw ContractViolation("register_clouds: covariance count mismatch");
  }

  RegistrationResult result;
  RigidTransform T;  // correction, starts at identity
  double lambda = params.levenberg_init;

  std::vector<detail::Correspondence> corr;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    result.iterations = iter + 1;
    corr = detail::find_correspondences(source, T, target, max_corr);
    if (static_cast<int>(corr.size()) < params.min_correspondences) {
      throw InsufficientCorrespondencesError(
          "register_clouds: only " + std::to_string(corr.size()) +
          " correspondences within " + std::to_string(max_corr) + " m",
          static_cast<int>(corr.size()));
    }

    const detail::GicpLinearization lin =
        detail::linearize(source, source_cov, target, corr, T);
    bool accepted = false;
    Vec6 delta = Vec6::Zero();
    for (int trial = 0; trial < 10; ++trial) {
      const Mat6 damped = lin.H + lambda * Mat6::Identity();
      delta = damped.ldlt().solve(-lin.b);
      const RigidTransform candidate = T * se3_exp(delta);
      const double e =
          detail::frozen_objective(source, target, corr, lin.weights, candidate);
      if (e < lin.objective) {
        T = candidate;
        result.residual_history.emplace_back(lin.objective, e);
        lambda = std::max(lambda * 0.5, 1e-12);
        accepted = true;
        if (delta.norm() < params.update_tolerance ||
            (lin.objective - e) <=
                params.residual_rel_tolerance * std::max(lin.objective, 1e-30)) {
          result.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No descent direction left at this damping range: treat the current
      // estimate as converged rather than spinning.
      result.converged = true;
      break;
    }
    if (result.converged) break;
  }

  // Final evaluation at the solution.
  corr = detail::find_correspondences(source, T, target, max_corr);
  if (static_cast<int>(corr.size()) < params.min_correspondences) {
    throw InsufficientCorrespondencesError(
        "register_clouds: only " + std::to_string(corr.size()) +
        " correspondences at the solution",
        static_cast<int>(corr.size()));
  }
  const detail::GicpLinearization fin =
      detail::linearize(source, source_cov, target, corr, T);
  result.correction = T;
  result.refined_pose = T * prior;
  result.residual = fin.objective;
  result.correspondences = static_cast<int>(corr.size());
  result.hessian = fin.H;
  result.hessian_tt = fin.H.topLeftCorner<3, 3>();
  double fit = 0.0;
  for (const auto& c : corr) {
    fit += (target.cloud->points[c.target].position -
            T * source.points[c.source].position)
               .norm();
  }
  result.fitness = fit / static_cast<double>(corr.size());
  return result;
}

}  // namespace lio

#endif  // LIO_GICP_HPP
