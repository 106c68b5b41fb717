// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_MAPPER_HPP
#define LIO_MAPPER_HPP

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "lio/gicp.hpp"
#include "lio/keyframe.hpp"
#include "lio/pose_graph.hpp"
#include "lio/submap.hpp"

namespace lio {

/// Map-from-odometry offset. Identity until the first loop closure; updated
/// so the latest keyframe's odometry-frame pose never jumps.
struct FrameOffset {
  RigidTransform map_from_odom;
};

struct LoopParams {
  bool enabled = true;
  double radius = 5.0;             // candidate search radius, meters
  double min_overlap = 0.1;        // or: connectivity row at least this
  double fitness_threshold = 0.3;  // mean correspondence distance, meters
  int exclusion_window = 10;       // skip this many most recent keyframes
  double max_corr = 2.0;           // enlarged plane-to-plane search distance
};

/// Keyframe as the mapper stores it: the cloud is kept in the keyframe's own
/// frame so optimization never needs to re-transform it.
struct MapperKeyframe {
  int id = 0;
  RigidTransform odom_pose;  // as received from the odometry thread
  StampedPointCloud cloud_local;
  std::shared_ptr<const PointCovariances> covariances_local;
  std::shared_ptr<const KdTree> index_local;
};

struct LoopClosure {
  int from = 0;  // closest candidate keyframe
  int to = 0;    // new keyframe
  RigidTransform measurement;  // relative pose from->to
  double fitness = 0.0;
  double noise_scale = 0.0;
};

/// Three-step loop closure detection against the given map-frame poses:
/// gather candidates by radius or overlap (excluding the most recent
/// keyframes), register the new keyframe against the concatenated loop
/// cloud primed with the current relative pose, and accept on low fitness.
inline std::optional<LoopClosure> detect_loop(
    std::span<const MapperKeyframe> keyframes,
    const std::vector<RigidTransform>& map_poses, int new_id,
    const ConnectivityMatrix& connectivity, const LoopParams& params,
    const GicpParams& gicp_params = {}) {
  const int newest_allowed = new_id - params.exclusion_window - 1;
  if (newest_allowed < 0) return std::nullopt;

  const RigidTransform& T_new = map_poses[new_id];
  std::vector<int> candidates;
  int closest = -1;
  double closest_dist = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= newest_allowed; ++j) {
    const double dist =
        (map_poses[j].translation - T_new.translation).norm();
    const double overlap = connectivity.at(new_id, j);
    if (dist > params.radius && overlap < params.min_overlap) continue;
    candidates.push_back(j);
    if (dist < closest_dist) {
      closest_dist = dist;
      closest = j;
    }
  }
  if (candidates.empty()) return std::nullopt;

  // Loop cloud: candidate clouds at their current map poses.
  StampedPointCloud loop_cloud;
  loop_cloud.frame = Frame::world;
  std::vector<Mat3> loop_covs;
  for (int j : candidates) {
    const Mat3 R = map_poses[j].rotation.toRotationMatrix();
    for (const Point& p : keyframes[j].cloud_local.points) {
      loop_cloud.points.push_back({map_poses[j] * p.position, p.t_rel});
    }
    for (const Mat3& C : keyframes[j].covariances_local->cov) {
      loop_covs.push_back(R * C * R.transpose());
    }
  }
  const KdTree loop_index(loop_cloud);
  const RegistrationTarget target{&loop_cloud, &loop_covs, &loop_index};

  // Source: the new keyframe cloud placed at its current (drifted) pose,
  // which is exactly the prior the registration is primed with.
  const Mat3 Rn = T_new.rotation.toRotationMatrix();
  StampedPointCloud source;
  source.frame = Frame::world;
  source.points.reserve(keyframes[new_id].cloud_local.size());
  for (const Point& p : keyframes[new_id].cloud_local.points) {
    source.points.push_back({T_new * p.position, p.t_rel});
  }
  PointCovariances source_covs;
  source_covs.cov.reserve(source.size());
  for (const Mat3& C : keyframes[new_id].covariances_local->cov) {
    source_covs.cov.push_back(Rn * C * Rn.transpose());
  }

  RegistrationResult res;
  try {
    res = register_clouds(source, source_covs, target, T_new, params.max_corr,
                          gicp_params);
  } catch (const InsufficientCorrespondencesError&) {
    return std::nullopt;
  }
  if (res.fitness > params.fitness_threshold) return std::nullopt;

  LoopClosure out;
  out.from = closest;
  out.to = new_id;
  out.measurement = map_poses[closest].inverse() * res.refined_pose;
  out.fitness = res.fitness;
  out.noise_scale = std::max(res.fitness, 1e-3);
  return out;
}

struct MapperConfig {
  double sequential_noise = 1e-2;
  double prior_noise = 1e-4;
  double connective_threshold = 0.3;
  double connective_zeta = 0.1;
  double connective_noise_floor = 1e-6;
  LoopParams loop;
  GicpParams gicp;
};

struct KeyframeMessage {
  MapperKeyframe keyframe;
  std::vector<double> connectivity_row;  // overlap against earlier keyframes
};

/// Optimized keyframe poses pushed back to the odometry thread, already in
/// the odometry frame. The latest keyframe's pose is copied verbatim from
/// the odometry input so it never jumps.
struct MapUpdateMessage {
  std::vector<RigidTransform> odom_poses;
  RigidTransform map_from_odom;
  int latest_id = 0;
  int loops_closed = 0;
};

/// Background mapper: consumes keyframes in order, maintains the factor
/// graph, closes loops and publishes pose updates. Runs inline in
/// single-thread mode and on a worker thread otherwise; the processing path
/// is identical, so results do not depend on the mode.
class Mapper {
 public:
  explicit Mapper(const MapperConfig& config, bool threaded)
      : config_(config), threaded_(threaded) {
    if (threaded_) worker_ = std::thread([this] { run(); });
  }

  ~Mapper() { finish(); }

  void submit(KeyframeMessage msg) {
    if (threaded_) {
      {
        std::lock_guard lock(mutex_);
        inbox_.push_back(std::move(msg));
      }
      cv_.notify_one();
    } else {
      process(std::move(msg));
    }
  }

  /// Latest pending pose update, if any. Threaded callers receive updates at
  /// whatever scan boundary they poll from; single-thread callers see them
  /// immediately after submit.
  std::optional<MapUpdateMessage> poll() {
    std::lock_guard lock(mutex_);
    if (outbox_.empty()) return std::nullopt;
    MapUpdateMessage msg = std::move(outbox_.back());  // newest wins
    outbox_.clear();
    return msg;
  }

  /// Block until every submitted keyframe has been processed.
  void drain() {
    if (!threaded_) return;
    std::unique_lock lock(mutex_);
    idle_cv_.wait(lock, [this] { return inbox_.empty() && !busy_; });
  }

  void finish() {
    if (threaded_ && worker_.joinable()) {
      {
        std::lock_guard lock(mutex_);
        done_ = true;
      }
      cv_.notify_one();
      worker_.join();
    }
  }

  // Introspection (tests and exporters); call only when quiescent.
  const PoseGraph& graph() const { return graph_; }
  const std::vector<LoopClosure>& closures() const { return closures_; }
  const FrameOffset& offset() const { return offset_; }

 private:
  void run() {
    for (;;) {
      KeyframeMessage msg;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return done_ || !inbox_.empty(); });
        if (inbox_.empty()) return;  // done and drained
        msg = std::move(inbox_.front());
        inbox_.pop_front();
        busy_ = true;
      }
      process(std::move(msg));
      {
        std::lock_guard lock(mutex_);
        busy_ = false;
      }
      idle_cv_.notify_all();
    }
  }

  void process(KeyframeMessage msg) {
    const int id = msg.keyframe.id;
    keyframes_.push_back(std::move(msg.keyframe));
    connectivity_.append(msg.connectivity_row);

    const RigidTransform node_pose =
        offset_.map_from_odom * keyframes_.back().odom_pose;
    graph_.add_keyframe_node(id, node_pose, config_.sequential_noise,
                             config_.prior_noise);
    graph_.add_connective_factors(
        id, [&](int j) { return connectivity_.at(id, j); },
        config_.connective_threshold, config_.connective_zeta,
        config_.connective_noise_floor);

    int loops_now = 0;
    if (config_.loop.enabled) {
      const auto loop = detect_loop(keyframes_, graph_.poses(), id,
                                    connectivity_, config_.loop, config_.gicp);
      if (loop.has_value()) {
        graph_.add_loop_factor(loop->from, loop->to, loop->measurement,
                               loop->noise_scale);
        closures_.push_back(*loop);
        ++loops_now;
      }
    }

    const OptimizeReport report = graph_.optimize();
    if (!report.changed) return;  // nothing moved; keep silence

    // Re-anchor the odometry frame on the latest keyframe.
    const RigidTransform& latest_odom = keyframes_.back().odom_pose;
    const RigidTransform new_offset = graph_.pose(id) * latest_odom.inverse();

    MapUpdateMessage update;
    update.latest_id = id;
    update.map_from_odom = new_offset;
    update.loops_closed = loops_now;
    update.odom_poses.reserve(keyframes_.size());
    const RigidTransform inv = new_offset.inverse();
    for (int j = 0; j < graph_.size(); ++j) {
      update.odom_poses.push_back(j == id ? latest_odom : inv * graph_.pose(j));
    }
    offset_.map_from_odom = new_offset;

    std::lock_guard lock(mutex_);
    outbox_.push_back(std::move(update));
  }

  MapperConfig config_;
  bool threaded_ = false;

  std::vector<MapperKeyframe> keyframes_;
  ConnectivityMatrix connectivity_;
  PoseGraph graph_;
  std::vector<LoopClosure> closures_;
  FrameOffset offset_;

  std::thread worker_;
  std::mutex mutex_;
  std::condition_variable cv_, idle_cv_;
  std::deque<KeyframeMessage> inbox_;
  std::vector<MapUpdateMessage> outbox_;
  bool done_ = false;
  bool busy_ = false;
};

}  // namespace lio

#endif  // LIO_MAPPER_HPP
