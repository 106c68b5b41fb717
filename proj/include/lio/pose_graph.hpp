// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_POSE_GRAPH_HPP
#define LIO_POSE_GRAPH_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "lio/errors.hpp"
#include "lio/geometry.hpp"

namespace lio {

enum class FactorKind { prior, sequential, connective, loop };

struct Factor {
  FactorKind kind = FactorKind::sequential;
  int from = 0;
  int to = 0;
  RigidTransform measurement;  // relative pose from->to (prior: absolute)
  double noise_scale = 1.0;    // residuals are weighted by its inverse
};

struct OptimizeParams {
  int max_iterations = 50;
  double update_tolerance = 1e-10;
  double rel_tolerance = 1e-12;
  double fd_step = 1e-6;
  double levenberg_init = 1e-8;
};

struct OptimizeReport {
  double initial_residual = 0.0;
  double final_residual = 0.0;
  int iterations = 0;
  bool changed = false;
};

/// Keyframe pose graph: nodes indexed by contiguous keyframe id, node 0
/// pinned by the single prior factor. Sequential factors form the spanning
/// path; connective and loop factors add redundancy.
class PoseGraph {
 public:
  int size() const { return static_cast<int>(poses_.size()); }
  const std::vector<RigidTransform>& poses() const { return poses_; }
  const RigidTransform& pose(int id) const { return poses_.at(id); }
  const std::vector<Factor>& factors() const { return factors_; }

  int count(FactorKind kind) const {
    return static_cast<int>(
        std::count_if(factors_.begin(), factors_.end(),
                      [&](const Factor& f) { return f.kind == kind; }));
  }

  /// First node: adds the prior. Later nodes: sequential factor carrying the
  /// relative pose from the previous node at insertion time.
  void add_keyframe_node(int id, const RigidTransform& pose,
                         double sequential_noise = 1e-2,
                         double prior_noise = 1e-4) {
    if (id != size()) {
      throw ContractViolation("PoseGraph: node ids must be contiguous, got " +
                              std::to_string(id) + " expected " +
                              std::to_string(size()));
    }
    poses_.push_back(pose);
    if (id == 0) {
      factors_.push_back({FactorKind::prior, 0, 0, pose, prior_noise});
      return;
    }
    const RigidTransform rel = poses_[id - 1].inverse() * pose;
    factors_.push_back({FactorKind::sequential, id - 1, id, rel, sequential_noise});
  }

  /// Relative measurements between overlapping keyframes, noise scaled as
  /// zeta * (1 - overlap) with a floor so full overlap never yields an
  /// infinite weight. The sequential neighbor is skipped.
  template <typename OverlapAt>
  void add_connective_factors(int id, OverlapAt&& overlap_with, double threshold,
                              double zeta, double noise_floor = 1e-6) {
    for (int j = 0; j < size(); ++j) {
      if (j == id || j == id - 1) continue;
      const double c = overlap_with(j);
      if (c < threshold) continue;
      const RigidTransform rel = poses_[j].inverse() * poses_[id];
      factors_.push_back({FactorKind::connective, j, id, rel,
                          std::max(zeta * (1.0 - c), noise_floor)});
    }
  }

  void add_loop_factor(int from, int to, const RigidTransform& measurement,
                       double noise_scale) {
    factors_.push_back({FactorKind::loop, from, to, measurement, noise_scale});
  }

  bool is_connected() const {
    if (poses_.empty()) return true;
    std::vector<char> seen(poses_.size(), 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      for (const Factor& f : factors_) {
        if (f.kind == FactorKind::prior) continue;
        const int other = f.from == n ? f.to : (f.to == n ? f.from : -1);
        if (other >= 0 && !seen[other]) {
          seen[other] = 1;
          stack.push_back(other);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  }

  double total_weighted_residual() const {
    return residual_of(poses_);
  }

  /// Damped Gauss-Newton over all node poses but the pinned first one.
  /// Jacobians are central differences of the per-factor log residual.
  /// The graph is updated only when the total residual improves; divergence
  /// into non-finite territory leaves it untouched.
  OptimizeReport optimize(const OptimizeParams& params = {}) {
    if (!is_connected()) {
      throw ContractViolation("PoseGraph::optimize: graph is not connected");
    }
    OptimizeReport report;
    report.initial_residual = residual_of(poses_);
    report.final_residual = report.initial_residual;
    if (size() <= 1) return report;

    std::vector<RigidTransform> work = poses_;
    const int dof = 6 * (size() - 1);
    double lambda = params.levenberg_init;
    double current = report.initial_residual;

    for (int iter = 0; iter < params.max_iterations; ++iter) {
      report.iterations = iter + 1;
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dof, dof);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(dof);
      for (const Factor& f : factors_) {
        if (f.kind == FactorKind::prior) continue;
        accumulate_factor(work, f, params.fd_step, H, b);
      }

      bool accepted = false;
      for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd damped = H;
        damped.diagonal().array() += lambda;
        const Eigen::VectorXd delta = damped.ldlt().solve(-b);
        if (!delta.allFinite()) {
          throw OptimizationFailedError(
              "PoseGraph::optimize: non-finite update, graph unchanged");
        }
        std::vector<RigidTransform> candidate = work;
        for (int n = 1; n < size(); ++n) {
          candidate[n] = candidate[n] * se3_exp(delta.segment<6>(6 * (n - 1)));
        }
        const double e = residual_of(candidate);
        if (!std::isfinite(e)) {
          throw OptimizationFailedError(
              "PoseGraph::optimize: non-finite residual, graph unchanged");
        }
        if (e < current) {
          work = std::move(candidate);
          lambda = std::max(lambda * 0.5, 1e-12);
          accepted = true;
          report.changed = true;
          const bool tiny_update = delta.norm() < params.update_tolerance;
          const bool tiny_gain =
              (current - e) <= params.rel_tolerance * std::max(current, 1e-30);
          current = e;
          if (tiny_update || tiny_gain) iter = params.max_iterations;  // stop
          break;
        }
        lambda *= 10.0;
      }
      if (!accepted) break;
    }

    if (report.changed) poses_ = std::move(work);
    report.final_residual = current;
    return report;
  }

 private:
  double residual_of(const std::vector<RigidTransform>& poses) const {
    double total = 0.0;
    for (const Factor& f : factors_) {
      if (f.kind == FactorKind::prior) continue;
      total += se3_log(f.measurement.inverse() *
                       (poses[f.from].inverse() * poses[f.to]))
                   .squaredNorm() /
               f.noise_scale;
    }
    return total;
  }

  void accumulate_factor(const std::vector<RigidTransform>& poses,
                         const Factor& f, double h, Eigen::MatrixXd& H,
                         Eigen::VectorXd& b) const {
    const double w = 1.0 / f.noise_scale;
    auto residual = [&](const RigidTransform& a, const RigidTransform& c) {
      return Vec6(se3_log(f.measurement.inverse() * (a.inverse() * c)));
    };
    const Vec6 r0 = residual(poses[f.from], poses[f.to]);

    Eigen::Matrix<double, 6, 12> J = Eigen::Matrix<double, 6, 12>::Zero();
    for (int k = 0; k < 6; ++k) {
      Vec6 step = Vec6::Zero();
      step(k) = h;
      const Vec6 plus = residual(poses[f.from] * se3_exp(step), poses[f.to]);
      const Vec6 minus = residual(poses[f.from] * se3_exp(-step), poses[f.to]);
      J.col(k) = (plus - minus) / (2.0 * h);
      const Vec6 plus2 = residual(poses[f.from], poses[f.to] * se3_exp(step));
      const Vec6 minus2 = residual(poses[f.from], poses[f.to] * se3_exp(-step));
      J.col(6 + k) = (plus2 - minus2) / (2.0 * h);
    }

    const int bi = 6 * (f.from - 1);
    const int bj = 6 * (f.to - 1);
    const auto Ji = J.leftCols<6>();
    const auto Jj = J.rightCols<6>();
    if (f.from > 0) {
      H.block<6, 6>(bi, bi) += w * Ji.transpose() * Ji;
      b.segment<6>(bi) += w * Ji.transpose() * r0;
    }
    if (f.to > 0) {
      H.block<6, 6>(bj, bj) += w * Jj.transpose() * Jj;
      b.segment<6>(bj) += w * Jj.transpose() * r0;
    }
    if (f.from > 0 && f.to > 0) {
      H.block<6, 6>(bi, bj) += w * Ji.transpose() * Jj;
      H.block<6, 6>(bj, bi) += w * Jj.transpose() * Ji;
    }
  }

  std::vector<RigidTransform> poses_;
  std::vector<Factor> factors_;
};

}  // namespace lio

#endif  // LIO_POSE_GRAPH_HPP
