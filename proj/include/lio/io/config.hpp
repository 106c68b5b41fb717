// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_IO_CONFIG_HPP
#define LIO_IO_CONFIG_HPP

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "lio/errors.hpp"
#include "lio/gicp.hpp"
#include "lio/imu.hpp"
#include "lio/keyframe.hpp"
#include "lio/mapper.hpp"
#include "lio/observer.hpp"

namespace lio::io {

/// Every pipeline tunable in one validated value. Field defaults are the
/// shipping defaults; the JSON form may override any subset but unknown
/// keys are rejected.
struct PipelineConfig {
  struct Preprocessing {
    double box_half_extent = 0.5;  // 1 m cube around the sensor
    double voxel_leaf = 0.25;      // 0 disables the voxel filter
  } preprocessing;

  struct Extrinsics {
    RigidTransform lidar_to_robot;  // identity by default
    Quat imu_rotation = Quat::Identity();
    Vec3 imu_lever_arm = Vec3::Zero();
    double gravity = 9.80665;
  } extrinsics;

  struct Covariance {
    int k_neighbors = 10;
    double epsilon = 1e-3;
  } covariance;

  struct Sparsity {
    double alpha = 0.95;
    double beta = 0.05;
    int k_neighbors = 5;
  } sparsity;

  struct Spaciousness {
    double alpha = 0.95;
    double beta = 0.05;
  } spaciousness;

  GicpParams gicp;
  KeyframeThresholds keyframe;

  struct SubmapParams {
    double jaccard_threshold = 0.2;
    double corr_dist = 0.5;
    int refresh_interval = 3;  // scans between rebuilds without keyframes
  } submap;

  struct GraphParams {
    double connective_threshold = 0.3;
    double zeta = 0.1;
    double noise_floor = 1e-6;
    double sequential_noise = 1e-2;
    double prior_noise = 1e-4;
  } graph;

  LoopParams loop;
  ObserverGains observer;

  struct Initial {
    Vec3 position = Vec3::Zero();
    Quat orientation = Quat::Identity();
    Vec3 velocity = Vec3::Zero();
    Vec3 accel_bias = Vec3::Zero();
    Vec3 gyro_bias = Vec3::Zero();
  } initial;

  /// Fault injection for simulation studies: per-scan translation
  /// increments are scaled by `translation_scale` while t < `until`.
  struct Faults {
    double translation_scale = 1.0;
    double until = 0.0;
  } faults;

  struct Output {
    double map_leaf = 0.1;
  } output;

  int deferred_retransforms_per_scan = 2;

  ImuCalibration imu_calibration() const {
    return ImuCalibration{extrinsics.imu_rotation, extrinsics.imu_lever_arm,
                          extrinsics.gravity};
  }

  StateVector initial_state() const {
    StateVector s;
    s.p = initial.position;
    s.q = initial.orientation;
    s.v = initial.velocity;
    s.accel_bias = initial.accel_bias;
    s.gyro_bias = initial.gyro_bias;
    return s;
  }
};

namespace detail {

using nlohmann::json;

/// Object reader that rejects unknown keys on destruction-free `finish()`.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ParseError("config: " + path_ + " must be an object");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = at(key).get<T>();
    } catch (const json::exception&) {
      throw ParseError("config: bad value for " + path_ + "." + key);
    }
  }

  void read_vec3(const std::string& key, Vec3& out) {
    if (!has(key)) return;
    const json& a = at(key);
    if (!a.is_array() || a.size() != 3) {
      throw ParseError("config: " + path_ + "." + key + " must be [x, y, z]");
    }
    out = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  }

  void read_quat(const std::string& key, Quat& out) {
    if (!has(key)) return;
    const json& a = at(key);
    if (!a.is_array() || a.size() != 4) {
      throw ParseError("config: " + path_ + "." + key + " must be [w, x, y, z]");
    }
    out = quat_normalized(Quat(a[0].get<double>(), a[1].get<double>(),
                               a[2].get<double>(), a[3].get<double>()));
  }

  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ParseError("config: unknown key " + path_ + "." + it.key());
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ParseError("config: " + what);
}

}  // namespace detail

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  using detail::StrictObject;
  PipelineConfig c;
  StrictObject root(j, "");

  if (root.has("preprocessing")) {
    StrictObject o(root.at("preprocessing"), "preprocessing");
    o.read("box_half_extent", c.preprocessing.box_half_extent);
    o.read("voxel_leaf", c.preprocessing.voxel_leaf);
    o.finish();
  }
  if (root.has("extrinsics")) {
    StrictObject o(root.at("extrinsics"), "extrinsics");
    o.read_quat("lidar_rotation", c.extrinsics.lidar_to_robot.rotation);
    o.read_vec3("lidar_translation", c.extrinsics.lidar_to_robot.translation);
    o.read_quat("imu_rotation", c.extrinsics.imu_rotation);
    o.read_vec3("imu_lever_arm", c.extrinsics.imu_lever_arm);
    o.read("gravity", c.extrinsics.gravity);
    o.finish();
  }
  if (root.has("covariance")) {
    StrictObject o(root.at("covariance"), "covariance");
    o.read("k_neighbors", c.covariance.k_neighbors);
    o.read("epsilon", c.covariance.epsilon);
    o.finish();
  }
  if (root.has("sparsity")) {
    StrictObject o(root.at("sparsity"), "sparsity");
    o.read("alpha", c.sparsity.alpha);
    o.read("beta", c.sparsity.beta);
    o.read("k_neighbors", c.sparsity.k_neighbors);
    o.finish();
  }
  if (root.has("spaciousness")) {
    StrictObject o(root.at("spaciousness"), "spaciousness");
    o.read("alpha", c.spaciousness.alpha);
    o.read("beta", c.spaciousness.beta);
    o.finish();
  }
  if (root.has("gicp")) {
    StrictObject o(root.at("gicp"), "gicp");
    o.read("max_iterations", c.gicp.max_iterations);
    o.read("update_tolerance", c.gicp.update_tolerance);
    o.read("residual_rel_tolerance", c.gicp.residual_rel_tolerance);
    o.read("min_correspondences", c.gicp.min_correspondences);
    o.finish();
  }
  if (root.has("keyframe")) {
    StrictObject o(root.at("keyframe"), "keyframe");
    o.read("degeneracy_delta", c.keyframe.degeneracy_delta);
    o.read("translation", c.keyframe.translation);
    o.read("rotation_deg", c.keyframe.rotation_deg);
    o.finish();
  }
  if (root.has("submap")) {
    StrictObject o(root.at("submap"), "submap");
    o.read("jaccard_threshold", c.submap.jaccard_threshold);
    o.read("corr_dist", c.submap.corr_dist);
    o.read("refresh_interval", c.submap.refresh_interval);
    o.finish();
  }
  if (root.has("graph")) {
    StrictObject o(root.at("graph"), "graph");
    o.read("connective_threshold", c.graph.connective_threshold);
    o.read("zeta", c.graph.zeta);
    o.read("noise_floor", c.graph.noise_floor);
    o.read("sequential_noise", c.graph.sequential_noise);
    o.read("prior_noise", c.graph.prior_noise);
    o.finish();
  }
  if (root.has("loop")) {
    StrictObject o(root.at("loop"), "loop");
    o.read("enabled", c.loop.enabled);
    o.read("radius", c.loop.radius);
    o.read("min_overlap", c.loop.min_overlap);
    o.read("fitness_threshold", c.loop.fitness_threshold);
    o.read("exclusion_window", c.loop.exclusion_window);
    o.read("max_corr", c.loop.max_corr);
    o.finish();
  }
  if (root.has("observer")) {
    StrictObject o(root.at("observer"), "observer");
    o.read("attitude", c.observer.attitude);
    o.read("gyro_bias", c.observer.gyro_bias);
    o.read("position", c.observer.position);
    o.read("velocity", c.observer.velocity);
    o.read("accel_bias", c.observer.accel_bias);
    o.finish();
  }
  if (root.has("initial")) {
    StrictObject o(root.at("initial"), "initial");
    o.read_vec3("position", c.initial.position);
    o.read_quat("orientation", c.initial.orientation);
    o.read_vec3("velocity", c.initial.velocity);
    o.read_vec3("accel_bias", c.initial.accel_bias);
    o.read_vec3("gyro_bias", c.initial.gyro_bias);
    o.finish();
  }
  if (root.has("faults")) {
    StrictObject o(root.at("faults"), "faults");
    o.read("translation_scale", c.faults.translation_scale);
    o.read("until", c.faults.until);
    o.finish();
  }
  if (root.has("output")) {
    StrictObject o(root.at("output"), "output");
    o.read("map_leaf", c.output.map_leaf);
    o.finish();
  }
  root.read("deferred_retransforms_per_scan", c.deferred_retransforms_per_scan);
  root.finish();

  using detail::require;
  require(c.preprocessing.box_half_extent >= 0.0, "box_half_extent must be >= 0");
  require(c.preprocessing.voxel_leaf >= 0.0, "voxel_leaf must be >= 0");
  require(c.extrinsics.gravity > 0.0, "gravity must be > 0");
  require(c.covariance.k_neighbors >= 4, "covariance.k_neighbors must be >= 4");
  require(c.covariance.epsilon > 0.0 && c.covariance.epsilon < 1.0,
          "covariance.epsilon must be in (0, 1)");
  require(std::abs(c.sparsity.alpha + c.sparsity.beta - 1.0) < 1e-12,
          "sparsity alpha + beta must equal 1");
  require(c.sparsity.k_neighbors >= 1, "sparsity.k_neighbors must be >= 1");
  require(std::abs(c.spaciousness.alpha + c.spaciousness.beta - 1.0) < 1e-12,
          "spaciousness alpha + beta must equal 1");
  require(c.gicp.max_iterations >= 1, "gicp.max_iterations must be >= 1");
  require(c.gicp.min_correspondences >= 3,
          "gicp.min_correspondences must be >= 3");
  require(c.keyframe.translation > 0.0, "keyframe.translation must be > 0");
  require(c.keyframe.rotation_deg > 0.0, "keyframe.rotation_deg must be > 0");
  require(c.submap.jaccard_threshold >= 0.0 && c.submap.jaccard_threshold <= 1.0,
          "submap.jaccard_threshold must be in [0, 1]");
  require(c.submap.corr_dist > 0.0, "submap.corr_dist must be > 0");
  require(c.submap.refresh_interval >= 1, "submap.refresh_interval must be >= 1");
  require(c.graph.zeta > 0.0, "graph.zeta must be > 0");
  require(c.loop.exclusion_window >= 0, "loop.exclusion_window must be >= 0");
  require(c.observer.attitude > 0.0 && c.observer.gyro_bias > 0.0 &&
              c.observer.position > 0.0 && c.observer.velocity > 0.0 &&
              c.observer.accel_bias > 0.0,
          "observer gains must be > 0");
  require(c.faults.translation_scale > 0.0, "faults.translation_scale must be > 0");
  require(c.output.map_leaf > 0.0, "output.map_leaf must be > 0");
  require(c.deferred_retransforms_per_scan >= 1,
          "deferred_retransforms_per_scan must be >= 1");
  return c;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["preprocessing"] = {{"box_half_extent", c.preprocessing.box_half_extent},
                        {"voxel_leaf", c.preprocessing.voxel_leaf}};
  const auto quat = [](const Quat& q) {
    return nlohmann::json::array({q.w(), q.x(), q.y(), q.z()});
  };
  const auto vec = [](const Vec3& v) {
    return nlohmann::json::array({v.x(), v.y(), v.z()});
  };
  j["extrinsics"] = {
      {"lidar_rotation", quat(c.extrinsics.lidar_to_robot.rotation)},
      {"lidar_translation", vec(c.extrinsics.lidar_to_robot.translation)},
      {"imu_rotation", quat(c.extrinsics.imu_rotation)},
      {"imu_lever_arm", vec(c.extrinsics.imu_lever_arm)},
      {"gravity", c.extrinsics.gravity}};
  j["covariance"] = {{"k_neighbors", c.covariance.k_neighbors},
                     {"epsilon", c.covariance.epsilon}};
  j["sparsity"] = {{"alpha", c.sparsity.alpha},
                   {"beta", c.sparsity.beta},
                   {"k_neighbors", c.sparsity.k_neighbors}};
  j["spaciousness"] = {{"alpha", c.spaciousness.alpha},
                       {"beta", c.spaciousness.beta}};
  j["gicp"] = {{"max_iterations", c.gicp.max_iterations},
               {"update_tolerance", c.gicp.update_tolerance},
               {"residual_rel_tolerance", c.gicp.residual_rel_tolerance},
               {"min_correspondences", c.gicp.min_correspondences}};
  j["keyframe"] = {{"degeneracy_delta", c.keyframe.degeneracy_delta},
                   {"translation", c.keyframe.translation},
                   {"rotation_deg", c.keyframe.rotation_deg}};
  j["submap"] = {{"jaccard_threshold", c.submap.jaccard_threshold},
                 {"corr_dist", c.submap.corr_dist},
                 {"refresh_interval", c.submap.refresh_interval}};
  j["graph"] = {{"connective_threshold", c.graph.connective_threshold},
                {"zeta", c.graph.zeta},
                {"noise_floor", c.graph.noise_floor},
                {"sequential_noise", c.graph.sequential_noise},
                {"prior_noise", c.graph.prior_noise}};
  j["loop"] = {{"enabled", c.loop.enabled},
               {"radius", c.loop.radius},
               {"min_overlap", c.loop.min_overlap},
               {"fitness_threshold", c.loop.fitness_threshold},
               {"exclusion_window", c.loop.exclusion_window},
               {"max_corr", c.loop.max_corr}};
  j["observer"] = {{"attitude", c.observer.attitude},
                   {"gyro_bias", c.observer.gyro_bias},
                   {"position", c.observer.position},
                   {"velocity", c.observer.velocity},
                   {"accel_bias", c.observer.accel_bias}};
  j["initial"] = {{"position", vec(c.initial.position)},
                  {"orientation", quat(c.initial.orientation)},
                  {"velocity", vec(c.initial.velocity)},
                  {"accel_bias", vec(c.initial.accel_bias)},
                  {"gyro_bias", vec(c.initial.gyro_bias)}};
  j["faults"] = {{"translation_scale", c.faults.translation_scale},
                 {"until", c.faults.until}};
  j["output"] = {{"map_leaf", c.output.map_leaf}};
  j["deferred_retransforms_per_scan"] = c.deferred_retransforms_per_scan;
  return j;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const PipelineConfig& c, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open config for writing: " + path);
  os << config_to_json(c).dump(2) << "\n";
}

}  // namespace lio::io

#endif  // LIO_IO_CONFIG_HPP
