// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_KEYFRAME_HPP
#define LIO_KEYFRAME_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lio/covariance.hpp"
#include "lio/errors.hpp"
#include "lio/geometry.hpp"
#include "lio/kdtree.hpp"
#include "lio/point_cloud.hpp"

namespace lio {

/// A stored scan anchoring the map: pose, world-frame cloud and the cached
/// index/covariances that submap extraction and overlap queries reuse.
struct Keyframe {
  int id = 0;
  RigidTransform pose;
  StampedPointCloud cloud;  // world (odometry) frame
  std::shared_ptr<const KdTree> index;
  std::shared_ptr<const PointCovariances> covariances;
  std::optional<double> degeneracy_at_creation;
};

inline Keyframe make_keyframe(int id, const RigidTransform& pose,
                              StampedPointCloud cloud, int k_covariance = 10,
                              double epsilon = 1e-3) {
  Keyframe kf;
  kf.id = id;
  kf.pose = pose;
  kf.cloud = std::move(cloud);
  kf.index = std::make_shared<KdTree>(kf.cloud);
  kf.covariances = std::make_shared<PointCovariances>(
      estimate_covariances(kf.cloud, *kf.index, k_covariance, epsilon));
  return kf;
}

/// Filtered median point range of the preprocessed robot-frame cloud, an
/// environment-scale proxy.
struct SpaciousnessTracker {
  double m = 0.0;
  bool initialized = false;
  double alpha = 0.95;
  double beta = 0.05;

  static double median_range(const StampedPointCloud& cloud) {
    if (cloud.empty()) throw ContractViolation("median_range: empty cloud");
    std::vector<double> r;
    r.reserve(cloud.size());
    for (const Point& p : cloud.points) r.push_back(p.position.norm());
    const std::size_t mid = r.size() / 2;
    std::nth_element(r.begin(), r.begin() + mid, r.end());
    double med = r[mid];
    if (r.size() % 2 == 0) {
      const double below = *std::max_element(r.begin(), r.begin() + mid);
      med = 0.5 * (med + below);
    }
    return med;
  }

  double update(const StampedPointCloud& robot_frame_cloud) {
    const double measured = median_range(robot_frame_cloud);
    m = initialized ? alpha * m + beta * measured : measured;
    initialized = true;
    return m;
  }
};

/// Global degeneracy: the largest eigenvalue of H_tt after scaling each as
/// m^2 / (lambda * sqrt(z)). Penalizes large environments, rewards sparse
/// clouds, and spikes when any translational direction loses constraints.
inline double global_degeneracy(const Mat3& h_tt, double m, double z) {
  if (z <= 0.0) throw ContractViolation("global_degeneracy: z must be > 0");
  if (m <= 0.0) throw ContractViolation("global_degeneracy: m must be > 0");
  if ((h_tt - h_tt.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ContractViolation("global_degeneracy: H_tt is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(h_tt);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda <= 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, m * m / (lambda * std::sqrt(z)));
  }
  return worst;
}

enum class KeyframeReason { none, bootstrap, degeneracy, translation, rotation };

inline const char* to_string(KeyframeReason r) {
  switch (r) {
    case KeyframeReason::none: return "none";
    case KeyframeReason::bootstrap: return "bootstrap";
    case KeyframeReason::degeneracy: return "degeneracy";
    case KeyframeReason::translation: return "translation";
    case KeyframeReason::rotation: return "rotation";
  }
  return "unknown";
}

struct KeyframeThresholds {
  double degeneracy_delta = 1.0;
  double translation = 1.0;          // meters
  double rotation_deg = 30.0;
};

struct KeyframeDecision {
  bool insert = false;
  KeyframeReason reason = KeyframeReason::none;
};

/// Slip-resistant keyframing: trigger on a degeneracy jump relative to the
/// previous keyframe, or on enough motion away from the nearest keyframe.
inline KeyframeDecision should_insert_keyframe(const RigidTransform& pose,
                                               double degeneracy,
                                               const Keyframe& nearest,
                                               const Keyframe& last,
                                               const KeyframeThresholds& th) {
  if (last.degeneracy_at_creation.has_value() &&
      std::abs(degeneracy - *last.degeneracy_at_creation) > th.degeneracy_delta) {
    return {true, KeyframeReason::degeneracy};
  }
  if ((pose.translation - nearest.pose.translation).norm() > th.translation) {
    return {true, KeyframeReason::translation};
  }
  if (quat_angle(pose.rotation, nearest.pose.rotation) >
      th.rotation_deg * M_PI / 180.0) {
    return {true, KeyframeReason::rotation};
  }
  return {false, KeyframeReason::none};
}

namespace detail {

/// Deterministic cloud ordering so the greedy intersection count is
/// evaluated from a canonical side regardless of argument order.
inline bool cloud_less(const StampedPointCloud& a, const StampedPointCloud& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double va = a.points[i].position[k], vb = b.points[i].position[k];
      if (va != vb) return va < vb;
    }
  }
  return false;
}

/// Greedy one-to-one matching: walk `from` in index order, claim each
/// point's nearest still-unclaimed neighbor of `to` within corr_dist.
inline int greedy_intersection_count(const StampedPointCloud& from,
                                     const StampedPointCloud& to,
                                     const KdTree& to_index, double corr_dist) {
  std::vector<char> claimed(to.size(), 0);
  int count = 0;
  const int n = static_cast<int>(to.size());
  for (const Point& p : from.points) {
    for (int k = 4;; k *= 4) {
      const auto hits = to_index.knn(p.position, std::min(k, n));
      bool exhausted = static_cast<int>(hits.size()) >= n;
      bool done = false;
      for (const auto& h : hits) {
        if (h.distance > corr_dist) {
          done = true;  // nothing unclaimed in range
          break;
        }
        if (!claimed[h.index]) {
          claimed[h.index] = 1;
          ++count;
          done = true;
          break;
        }
      }
      if (done || exhausted) break;
    }
  }
  return count;
}

}  // namespace detail

/// 3D Jaccard index of two clouds in a common frame: greedily matched
/// correspondence count over the union size |a| + |b| - |C|. Symmetric by
/// evaluating a canonical argument order.
inline double jaccard(const StampedPointCloud& a, const KdTree& a_index,
                      const StampedPointCloud& b, const KdTree& b_index,
                      double corr_dist) {
  if (corr_dist <= 0.0) throw ContractViolation("jaccard: corr_dist must be > 0");
  if (a.empty() || b.empty()) throw ContractViolation("jaccard: empty cloud");
  const bool a_first = detail::cloud_less(a, b);
  const StampedPointCloud& from = a_first ? a : b;
  const StampedPointCloud& to = a_first ? b : a;
  const KdTree& to_index = a_first ? b_index : a_index;
  const int c = detail::greedy_intersection_count(from, to, to_index, corr_dist);
  const double u = static_cast<double>(a.size() + b.size() - c);
  return static_cast<double>(c) / u;
}

inline double jaccard(const StampedPointCloud& a, const StampedPointCloud& b,
                      double corr_dist) {
  return jaccard(a, KdTree(a), b, KdTree(b), corr_dist);
}

inline double jaccard(const Keyframe& a, const Keyframe& b, double corr_dist) {
  return jaccard(a.cloud, *a.index, b.cloud, *b.index, corr_dist);
}

/// Symmetric keyframe-overlap matrix with a unit diagonal, grown one
/// keyframe at a time.
class ConnectivityMatrix {
 public:
  int size() const { return static_cast<int>(m_.rows()); }

  double at(int i, int j) const { return m_(i, j); }

  const Eigen::MatrixXd& matrix() const { return m_; }

  /// Append one keyframe given its overlap against each existing keyframe.
  void append(const std::vector<double>& overlaps) {
    const int k = size();
    if (static_cast<int>(overlaps.size()) != k) {
      throw ContractViolation("ConnectivityMatrix::append: wrong row length");
    }
    Eigen::MatrixXd grown(k + 1, k + 1);
    grown.topLeftCorner(k, k) = m_;
    for (int j = 0; j < k; ++j) {
      grown(k, j) = overlaps[j];
      grown(j, k) = overlaps[j];
    }
    grown(k, k) = 1.0;
    m_ = std::move(grown);
  }

 private:
  Eigen::MatrixXd m_ = Eigen::MatrixXd::Zero(0, 0);
};

/// Compute the new keyframe's overlap row and append it. `keyframes` holds
/// the existing keyframes in id order; new_kf must not be among them.
inline ConnectivityMatrix update_connectivity(ConnectivityMatrix C,
                                              const Keyframe& new_kf,
                                              std::span<const Keyframe> keyframes,
                                              double corr_dist) {
  if (C.size() != static_cast<int>(keyframes.size())) {
    throw ContractViolation("update_connectivity: matrix/keyframe mismatch");
  }
  std::vector<double> row;
  row.reserve(keyframes.size());
  for (const Keyframe& kf : keyframes) row.push_back(jaccard(new_kf, kf, corr_dist));
  C.append(row);
  return C;
}

}  // namespace lio

#endif  // LIO_KEYFRAME_HPP
