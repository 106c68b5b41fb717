// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_SUBMAP_HPP
#define LIO_SUBMAP_HPP

#include <memory>
#include <span>
#include <vector>

#include "lio/gicp.hpp"
#include "lio/keyframe.hpp"

namespace lio {

/// Registration target assembled from the keyframes that overlap the
/// current scan. Clouds and covariances are concatenated without
/// deduplication; only the merged index is built fresh.
struct Submap {
  StampedPointCloud cloud;
  std::vector<Mat3> covariances;
  std::shared_ptr<const KdTree> index;
  std::vector<int> keyframe_ids;
  std::vector<double> overlaps;  // jaccard per input keyframe, in order

  RegistrationTarget view() const { return {&cloud, &covariances, index.get()}; }
};

/// Pick every keyframe whose Jaccard overlap with the scan reaches the
/// threshold; when none qualify, fall back to the single best so the submap
/// is never empty.
inline Submap extract_submap(const StampedPointCloud& scan_world,
                             const KdTree& scan_index,
                             std::span<const Keyframe> keyframes,
                             double jaccard_threshold, double corr_dist) {
  if (keyframes.empty()) {
    throw ContractViolation("extract_submap: no keyframes");
  }
  Submap out;
  out.overlaps.reserve(keyframes.size());
  int best = 0;
  for (std::size_t j = 0; j < keyframes.size(); ++j) {
    const double overlap =
        jaccard(scan_world, scan_index, keyframes[j].cloud, *keyframes[j].index,
                corr_dist);
    out.overlaps.push_back(overlap);
    if (overlap > out.overlaps[best]) best = static_cast<int>(j);
  }

  std::vector<std::size_t> picked;
  for (std::size_t j = 0; j < keyframes.size(); ++j) {
    if (out.overlaps[j] >= jaccard_threshold) picked.push_back(j);
  }
  if (picked.empty()) picked.push_back(static_cast<std::size_t>(best));

  out.cloud.frame = Frame::world;
  for (std::size_t j : picked) {
    const Keyframe& kf = keyframes[j];
    out.keyframe_ids.push_back(kf.id);
    out.cloud.points.insert(out.cloud.points.end(), kf.cloud.points.begin(),
                            kf.cloud.points.end());
    out.covariances.insert(out.covariances.end(), kf.covariances->cov.begin(),
                           kf.covariances->cov.end());
  }
  out.index = std::make_shared<KdTree>(out.cloud);
  return out;
}

}  // namespace lio

#endif  // LIO_SUBMAP_HPP
