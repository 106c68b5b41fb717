// Shared cloud generators for the unit suites. Scene geometry here is
// deliberately hand-rolled so module tests stay independent of the
// simulator, which has its own suite.

#ifndef LIO_TESTS_HELPERS_HPP
#define LIO_TESTS_HELPERS_HPP

#include <random>

#include "lio/covariance.hpp"
#include "lio/gicp.hpp"
#include "lio/kdtree.hpp"
#include "lio/point_cloud.hpp"

namespace testing_helpers {

using namespace lio;

/// Grid of points on the plane z = z0.
inline StampedPointCloud plane_cloud(double half, double spacing,
                                     double z0 = 0.0) {
  StampedPointCloud c;
  c.frame = Frame::world;
  for (double x = -half; x <= half; x += spacing)
    for (double y = -half; y <= half; y += spacing)
      c.points.push_back({Vec3(x, y, z0), 0.0});
  return c;
}

/// Points sampled on the six inner faces of an axis-aligned box centered at
/// `center`, a crude room scan.
inline StampedPointCloud box_room_cloud(const Vec3& center, const Vec3& size,
                                        double spacing) {
  StampedPointCloud c;
  c.frame = Frame::world;
  const Vec3 h = size / 2.0;
  auto push = [&](double x, double y, double z) {
    c.points.push_back({center + Vec3(x, y, z), 0.0});
  };
  for (double a = -h.x(); a <= h.x(); a += spacing)
    for (double b = -h.y(); b <= h.y(); b += spacing) {
      push(a, b, -h.z());
      push(a, b, h.z());
    }
  for (double a = -h.x(); a <= h.x(); a += spacing)
    for (double b = -h.z() + spacing; b < h.z(); b += spacing) {
      push(a, -h.y(), b);
      push(a, h.y(), b);
    }
  for (double a = -h.y() + spacing; a < h.y(); a += spacing)
    for (double b = -h.z() + spacing; b < h.z(); b += spacing) {
      push(-h.x(), a, b);
      push(h.x(), a, b);
    }
  return c;
}

/// Corridor running along y: floor plus two parallel walls.
inline StampedPointCloud corridor_cloud(double length, double width,
                                        double height, double spacing) {
  StampedPointCloud c;
  c.frame = Frame::world;
  for (double y = -length / 2; y <= length / 2; y += spacing) {
    for (double x = -width / 2; x <= width / 2; x += spacing) {
      c.points.push_back({Vec3(x, y, 0.0), 0.0});  // floor
    }
    for (double z = spacing; z <= height; z += spacing) {
      c.points.push_back({Vec3(-width / 2, y, z), 0.0});
      c.points.push_back({Vec3(width / 2, y, z), 0.0});
    }
  }
  return c;
}

/// Owns everything a RegistrationTarget points at.
struct TargetData {
  StampedPointCloud cloud;
  PointCovariances covs;
  KdTree tree;

  explicit TargetData(StampedPointCloud c, int k = 10)
      : cloud(std::move(c)), covs(estimate_covariances(cloud, k)), tree(cloud) {}

  RegistrationTarget view() const { return {&cloud, &covs.cov, &tree}; }
};

inline StampedPointCloud jitter(const StampedPointCloud& cloud, double sigma,
                                unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  StampedPointCloud out = cloud;
  for (Point& p : out.points) p.position += Vec3(n(rng), n(rng), n(rng));
  return out;
}

}  // namespace testing_helpers

#endif  // LIO_TESTS_HELPERS_HPP
