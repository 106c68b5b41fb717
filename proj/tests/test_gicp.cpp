#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "lio/gicp.hpp"

using namespace lio;
using namespace testing_helpers;

namespace {

RigidTransform small_perturbation(double trans, double angle_deg,
                                  unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 axis(n(rng), n(rng), n(rng));
  axis.normalize();
  Vec3 dir(n(rng), n(rng), n(rng));
  dir.normalize();
  return RigidTransform(
      Quat(Eigen::AngleAxisd(angle_deg * M_PI / 180.0, axis)), dir * trans);
}

}  // namespace

TEST_CASE("sparsity of a unit-spaced line matches the exhaustive oracle") {
  StampedPointCloud line;
  line.frame = Frame::world;
  const int n = 10;
  for (int i = 0; i < n; ++i) line.points.push_back({Vec3(i, 0, 0), 0.0});

  SparsityTracker tracker;
  tracker.k_neighbors = 2;
  REQUIRE(tracker.update(line));

  // Oracle: exhaustive two-nearest-neighbor distances.
  double want = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> d;
    for (int j = 0; j < n; ++j)
      if (j != i) d.push_back(std::abs(j - i));
    std::sort(d.begin(), d.end());
    want += (d[0] + d[1]) / 2.0;
  }
  want /= n;
  REQUIRE(tracker.z == Catch::Approx(want).epsilon(1e-12));
  REQUIRE(want == Catch::Approx(1.1));  // interior 1.0, boundary 1.5
}

TEST_CASE("sparsity scales with the cloud") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  StampedPointCloud c;
  c.frame = Frame::world;
  for (int i = 0; i < 200; ++i) c.points.push_back({Vec3(u(rng), u(rng), u(rng)), 0.0});

  SparsityTracker a, b;
  a.update(c);
  StampedPointCloud scaled = c;
  for (Point& p : scaled.points) p.position *= 10.0;
  b.update(scaled);
  REQUIRE(b.z == Catch::Approx(10.0 * a.z).epsilon(1e-9));
}

TEST_CASE("sparsity filter converges geometrically at rate alpha") {
  SparsityTracker t;
  StampedPointCloud line;
  line.frame = Frame::world;
  for (int i = 0; i < 50; ++i) line.points.push_back({Vec3(i, 0, 0), 0.0});
  t.update(line);  // first update seeds z directly
  const double d = t.z;

  // Feed a cloud with a different constant measure and track the gap.
  StampedPointCloud wide;
  wide.frame = Frame::world;
  for (int i = 0; i < 50; ++i) wide.points.push_back({Vec3(2.0 * i, 0, 0), 0.0});
  SparsityTracker probe = t;
  probe.update(wide);
  const double d2 = 2.0 * d;
  double gap = std::abs(probe.z - d2);
  for (int step = 0; step < 20; ++step) {
    const double prev_gap = gap;
    probe.update(wide);
    gap = std::abs(probe.z - d2);
    REQUIRE(gap == Catch::Approx(0.95 * prev_gap).epsilon(1e-9));
  }
}

TEST_CASE("sparsity update on a tiny cloud sets the warning flag only") {
  SparsityTracker t;
  StampedPointCloud tiny;
  tiny.points.push_back({Vec3::Zero(), 0.0});
  REQUIRE_FALSE(t.update(tiny));
  REQUIRE(t.warned_small_cloud);
  REQUIRE_FALSE(t.initialized);
}

TEST_CASE("condition number basics") {
  REQUIRE(condition_number(Mat3::Identity()) == 1.0);
  REQUIRE(condition_number(Vec3(4, 2, 1).asDiagonal()) == Catch::Approx(4.0));
  REQUIRE(std::isinf(condition_number(Vec3(1, 1, 0).asDiagonal())));
  Mat3 bad;
  bad << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  REQUIRE_THROWS_AS(condition_number(bad), ContractViolation);
}

TEST_CASE("condition number matches an SVD oracle on random PSD matrices") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Mat3 A;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A(r, c) = n(rng);
    const Mat3 psd = A * A.transpose() + 0.1 * Mat3::Identity();
    Eigen::JacobiSVD<Mat3> svd(psd);
    const double want =
        svd.singularValues()(0) / svd.singularValues()(2);
    REQUIRE(condition_number(psd) == Catch::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("self-registration returns the identity") {
  const TargetData target(box_room_cloud(Vec3::Zero(), Vec3(6, 5, 3), 0.25));
  const PointCovariances covs = estimate_covariances(target.cloud, 10);
  const RegistrationResult res = register_clouds(
      target.cloud, covs, target.view(), RigidTransform::Identity(), 0.5);
  REQUIRE(res.correction.translation.norm() < 1e-6);
  REQUIRE(quat_angle(res.correction.rotation, Quat::Identity()) < 1e-6);
  REQUIRE(res.residual < 1e-9);
  REQUIRE(res.correspondences == static_cast<int>(target.cloud.size()));
}

TEST_CASE("registration inverts an injected perturbation") {
  const TargetData target(box_room_cloud(Vec3::Zero(), Vec3(6, 5, 3), 0.2));
  const RigidTransform pert = small_perturbation(0.05, 2.0, 21);
  const StampedPointCloud source = transform_cloud(target.cloud, pert);
  const PointCovariances covs = estimate_covariances(source, 10);

  const RegistrationResult res = register_clouds(
      source, covs, target.view(), RigidTransform::Identity(), 0.5);
  const RigidTransform residual = res.correction * pert;
  REQUIRE(residual.translation.norm() < 1e-3);
  REQUIRE(quat_angle(residual.rotation, Quat::Identity()) < 0.1 * M_PI / 180.0);
  REQUIRE(res.converged);
}

TEST_CASE("corridor Hessian is weak along the corridor axis") {
  // Floor plus two parallel walls running along y; translations along the
  // corridor produce no plane-to-plane residual gradient.
  const TargetData target(corridor_cloud(20.0, 3.0, 2.5, 0.25));
  const StampedPointCloud source = corridor_cloud(16.0, 3.0, 2.5, 0.3);
  const PointCovariances covs = estimate_covariances(source, 10);
  const RegistrationResult res = register_clouds(
      source, covs, target.view(), RigidTransform::Identity(), 0.6);

  Eigen::SelfAdjointEigenSolver<Mat3> eig(res.hessian_tt);
  // The weakest direction must be the corridor axis.
  const Vec3 weakest = eig.eigenvectors().col(0);
  REQUIRE(std::abs(weakest.y()) > 0.99);
  REQUIRE(eig.eigenvalues()(0) < 0.05 * eig.eigenvalues()(1));
}

TEST_CASE("H_tt is the translational block of the Hessian") {
  const TargetData target(box_room_cloud(Vec3::Zero(), Vec3(4, 4, 3), 0.25));
  const PointCovariances covs = estimate_covariances(target.cloud, 10);
  const RegistrationResult res = register_clouds(
      target.cloud, covs, target.view(), RigidTransform::Identity(), 0.5);
  REQUIRE(res.hessian_tt == res.hessian.topLeftCorner<3, 3>());
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> n(0.0, 1.0);
  const TargetData target(box_room_cloud(Vec3::Zero(), Vec3(4, 3, 2.5), 0.4));

  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const RigidTransform pose = small_perturbation(0.05, 2.0, 100 + trial);
    const StampedPointCloud source = transform_cloud(target.cloud, pose);
    const PointCovariances covs = estimate_covariances(source, 8);

    RigidTransform at = small_perturbation(0.02, 1.0, 200 + trial);
    const auto corr =
        detail::find_correspondences(source, at, target.view(), 0.8);
    if (corr.size() < 30) continue;
    const auto lin = detail::linearize(source, covs, target.view(), corr, at);

    const Vec6 analytic = 2.0 * lin.b;  // gradient of the frozen objective
    Vec6 fd;
    const double h = 1e-6;
    for (int k = 0; k < 6; ++k) {
      Vec6 step = Vec6::Zero();
      step(k) = h;
      const double plus = detail::frozen_objective(
          source, target.view(), corr, lin.weights, at * se3_exp(step));
      const double minus = detail::frozen_objective(
          source, target.view(), corr, lin.weights, at * se3_exp(-step));
      fd(k) = (plus - minus) / (2.0 * h);
    }
    REQUIRE((analytic - fd).norm() / fd.norm() < 1e-5);
    ++checked;
  }
  REQUIRE(checked >= 100);
}

TEST_CASE("objective is non-increasing across accepted iterations") {
  const TargetData target(box_room_cloud(Vec3::Zero(), Vec3(6, 5, 3), 0.25));
  const RigidTransform pert = small_perturbation(0.08, 3.0, 77);
  const StampedPointCloud source = transform_cloud(target.cloud, pert);
  const PointCovariances covs = estimate_covariances(source, 10);
  const RegistrationResult res = register_clouds(
      source, covs, target.view(), RigidTransform::Identity(), 0.8);
  REQUIRE_FALSE(res.residual_history.empty());
  for (const auto& [before, after] : res.residual_history) {
    REQUIRE(after <= before);
  }
}

TEST_CASE("registration is left-invariant to a common rigid motion") {
  const TargetData target(box_room_cloud(Vec3::Zero(), Vec3(5, 4, 3), 0.25));
  const RigidTransform pert = small_perturbation(0.04, 1.5, 55);
  const StampedPointCloud source = transform_cloud(target.cloud, pert);
  const PointCovariances covs = estimate_covariances(source, 10);
  const RigidTransform prior = RigidTransform::Identity();
  const RegistrationResult base =
      register_clouds(source, covs, target.view(), prior, 0.5);

  const RigidTransform G = small_perturbation(2.0, 35.0, 91);
  const Mat3 Rg = G.rotation.toRotationMatrix();
  const TargetData moved_target(transform_cloud(target.cloud, G));
  StampedPointCloud moved_source = transform_cloud(source, G);
  PointCovariances moved_covs = covs;
  for (Mat3& C : moved_covs.cov) C = Rg * C * Rg.transpose();

  const RegistrationResult moved = register_clouds(
      moved_source, moved_covs, moved_target.view(), G * prior, 0.5);
  const RigidTransform want_refined = G * base.refined_pose;
  REQUIRE((moved.refined_pose.translation - want_refined.translation).norm() <
          1e-6);
  REQUIRE(quat_angle(moved.refined_pose.rotation, want_refined.rotation) < 1e-6);
}

TEST_CASE("too few correspondences raises an error carrying the count") {
  const TargetData target(box_room_cloud(Vec3::Zero(), Vec3(4, 4, 3), 0.3));
  StampedPointCloud source = target.cloud;
  for (Point& p : source.points) p.position += Vec3(50, 0, 0);  // far away
  const PointCovariances covs = estimate_covariances(source, 10);
  try {
    register_clouds(source, covs, target.view(), RigidTransform::Identity(), 0.5);
    FAIL("expected InsufficientCorrespondencesError");
  } catch (const InsufficientCorrespondencesError& e) {
    REQUIRE(e.count < 20);
  }
}

TEST_CASE("iteration starvation reports converged=false") {
  const TargetData target(box_room_cloud(Vec3::Zero(), Vec3(6, 5, 3), 0.25));
  const RigidTransform pert = small_perturbation(0.1, 4.0, 13);
  const StampedPointCloud source = transform_cloud(target.cloud, pert);
  const PointCovariances covs = estimate_covariances(source, 10);
  GicpParams params;
  params.max_iterations = 1;
  const RegistrationResult res = register_clouds(
      source, covs, target.view(), RigidTransform::Identity(), 0.8, params);
  REQUIRE_FALSE(res.converged);
  REQUIRE(res.iterations == 1);
}

TEST_CASE("small targets violate the contract") {
  StampedPointCloud tiny = plane_cloud(0.4, 0.3);
  REQUIRE(tiny.size() < 50);
  const TargetData target(tiny, 4);
  const PointCovariances covs = estimate_covariances(tiny, 4);
  REQUIRE_THROWS_AS(
      register_clouds(tiny, covs, target.view(), RigidTransform::Identity(), 0.5),
      ContractViolation);
}
