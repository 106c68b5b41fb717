#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <map>
#include <random>

#include "lio/geometry.hpp"
#include "lio/point_cloud.hpp"

using namespace lio;

namespace {

std::mt19937_64 rng(42);

Quat random_unit_quat() {
  std::normal_distribution<double> n(0.0, 1.0);
  Quat q(n(rng), n(rng), n(rng), n(rng));
  return quat_normalized(q);
}

Vec3 random_vec(double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

RigidTransform random_transform(double scale = 1.0) {
  return RigidTransform(random_unit_quat(), random_vec(scale));
}

StampedPointCloud random_cloud(std::size_t n, double scale = 10.0) {
  StampedPointCloud c;
  c.frame = Frame::world;
  c.points.reserve(n);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({random_vec(scale), u(rng)});
  return c;
}

}  // namespace

TEST_CASE("quaternion composition matches rotation matrix composition") {
  for (int i = 0; i < 10000; ++i) {
    const Quat a = random_unit_quat();
    const Quat b = random_unit_quat();
    const Mat3 via_quat = (a * b).toRotationMatrix();
    const Mat3 via_mat = a.toRotationMatrix() * b.toRotationMatrix();
    REQUIRE((via_quat - via_mat).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("rigid transform inverse and associativity") {
  for (int i = 0; i < 200; ++i) {
    const RigidTransform T = random_transform(5.0);
    const RigidTransform should_be_identity = T.inverse() * T;
    REQUIRE(should_be_identity.translation.norm() < 1e-9);
    REQUIRE(quat_angle(should_be_identity.rotation, Quat::Identity()) < 1e-9);

    const RigidTransform A = random_transform(), B = random_transform(),
                         C = random_transform();
    const Vec3 p = random_vec(3.0);
    REQUIRE((((A * B) * C) * p - (A * (B * C)) * p).norm() < 1e-9);
  }
}

TEST_CASE("quaternion canonicalization flips only the sign") {
  const Quat q(-0.5, 0.5, 0.5, -0.5);
  const Quat c = quat_canonical(q);
  REQUIRE(c.w() >= 0.0);
  REQUIRE((c.toRotationMatrix() - q.toRotationMatrix()).cwiseAbs().maxCoeff() <
          1e-15);
}

TEST_CASE("se3 exp/log round trip") {
  for (int i = 0; i < 500; ++i) {
    Vec6 xi;
    // Rotation magnitude stays inside the principal branch of the log.
    xi << random_vec(2.0), random_vec(1.5);
    const Vec6 back = se3_log(se3_exp(xi));
    REQUIRE((back - xi).norm() < 1e-9);
  }
  REQUIRE(se3_exp(Vec6::Zero()).isApprox(RigidTransform::Identity(), 1e-15));
}

TEST_CASE("transform_cloud identity is a no-op") {
  const StampedPointCloud c = random_cloud(100);
  const StampedPointCloud out = transform_cloud(c, RigidTransform::Identity());
  REQUIRE(out.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    REQUIRE(out.points[i].position == c.points[i].position);
    REQUIRE(out.points[i].t_rel == c.points[i].t_rel);
  }
}

TEST_CASE("transform_cloud 90 degree yaw moves x onto y") {
  StampedPointCloud c;
  c.points.push_back({Vec3(1, 0, 0), 0.0});
  const RigidTransform yaw90(Quat(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ())),
                             Vec3::Zero());
  const StampedPointCloud out = transform_cloud(c, yaw90);
  REQUIRE((out.points[0].position - Vec3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("transform_cloud round trip through a random transform") {
  const StampedPointCloud c = random_cloud(1000);
  const RigidTransform T = random_transform(4.0);
  const StampedPointCloud back = transform_cloud(transform_cloud(c, T), T.inverse());
  for (std::size_t i = 0; i < c.size(); ++i) {
    REQUIRE((back.points[i].position - c.points[i].position).norm() < 1e-9);
  }
}

TEST_CASE("transform_cloud distributes over composition") {
  const StampedPointCloud c = random_cloud(200);
  const RigidTransform T1 = random_transform(), T2 = random_transform();
  const StampedPointCloud lhs = transform_cloud(transform_cloud(c, T1), T2);
  const StampedPointCloud rhs = transform_cloud(c, T2 * T1);
  for (std::size_t i = 0; i < c.size(); ++i) {
    REQUIRE((lhs.points[i].position - rhs.points[i].position).norm() < 1e-9);
  }
}

TEST_CASE("transform_cloud keeps empty clouds empty") {
  StampedPointCloud empty;
  REQUIRE(transform_cloud(empty, random_transform()).empty());
}

TEST_CASE("voxel_downsample keeps one point per occupied cell") {
  StampedPointCloud close;
  close.points.push_back({Vec3(0.0, 0.0, 0.0), 0.0});
  close.points.push_back({Vec3(0.01, 0.0, 0.0), 0.5});
  REQUIRE(voxel_downsample(close, 0.1).size() == 1);
  // The survivor is the first arrival, keeping its timestamp.
  REQUIRE(voxel_downsample(close, 0.1).points[0].t_rel == 0.0);

  StampedPointCloud apart;
  apart.points.push_back({Vec3(0.0, 0.0, 0.0), 0.0});
  apart.points.push_back({Vec3(1.0, 0.0, 0.0), 0.5});
  REQUIRE(voxel_downsample(apart, 0.1).size() == 2);
}

TEST_CASE("voxel_downsample count matches the cell-hash oracle") {
  const StampedPointCloud c = random_cloud(5000, 4.0);
  const double leaf = 0.37;
  // Oracle: count distinct occupied cells with an ordered map.
  std::map<std::array<long long, 3>, int> cells;
  for (const Point& p : c.points) {
    cells[{static_cast<long long>(std::floor(p.position.x() / leaf)),
           static_cast<long long>(std::floor(p.position.y() / leaf)),
           static_cast<long long>(std::floor(p.position.z() / leaf))}]++;
  }
  REQUIRE(voxel_downsample(c, leaf).size() == cells.size());
}

TEST_CASE("box_filter removes only near-origin points") {
  StampedPointCloud c;
  c.points.push_back({Vec3(0.2, 0.1, -0.3), 0.0});
  c.points.push_back({Vec3(2.0, 0.0, 0.0), 0.0});
  c.points.push_back({Vec3(0.0, 0.6, 0.0), 0.0});
  const StampedPointCloud out = box_filter(c, 0.5);
  REQUIRE(out.size() == 2);
  REQUIRE(out.points[0].position.x() == 2.0);
}
