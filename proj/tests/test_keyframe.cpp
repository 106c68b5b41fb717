#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "lio/keyframe.hpp"
#include "lio/submap.hpp"

using namespace lio;
using namespace testing_helpers;

namespace {

StampedPointCloud random_cloud(std::size_t n, double scale, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  StampedPointCloud c;
  c.frame = Frame::world;
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({Vec3(u(rng), u(rng), u(rng)), 0.0});
  return c;
}

// Exhaustive-scan greedy intersection with the same canonical ordering and
// (distance, index) tie rule as jaccard(), kd-tree free.
double brute_force_jaccard(const StampedPointCloud& a,
                           const StampedPointCloud& b, double corr_dist) {
  auto lex_less = [](const StampedPointCloud& x, const StampedPointCloud& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    for (std::size_t i = 0; i < x.size(); ++i)
      for (int k = 0; k < 3; ++k) {
        if (x.points[i].position[k] != y.points[i].position[k])
          return x.points[i].position[k] < y.points[i].position[k];
      }
    return false;
  };
  const StampedPointCloud& from = lex_less(a, b) ? a : b;
  const StampedPointCloud& to = lex_less(a, b) ? b : a;
  std::vector<char> claimed(to.size(), 0);
  int count = 0;
  for (const Point& p : from.points) {
    int best = -1;
    double best_d = corr_dist;
    for (std::size_t j = 0; j < to.size(); ++j) {
      if (claimed[j]) continue;
      const double d = (to.points[j].position - p.position).norm();
      if (d < best_d || (d == best_d && best == -1)) {
        best = static_cast<int>(j);
        best_d = d;
      }
    }
    if (best >= 0 && best_d <= corr_dist) {
      claimed[best] = 1;
      ++count;
    }
  }
  return count / static_cast<double>(a.size() + b.size() - count);
}

Keyframe simple_keyframe(int id, const Vec3& at, const StampedPointCloud& c,
                         std::optional<double> degeneracy = std::nullopt) {
  Keyframe kf = make_keyframe(id, RigidTransform(Quat::Identity(), at), c, 8);
  kf.degeneracy_at_creation = degeneracy;
  return kf;
}

}  // namespace

TEST_CASE("spaciousness median and filter") {
  StampedPointCloud ring;
  ring.frame = Frame::robot;
  for (int i = 0; i < 100; ++i) {
    const double a = 2 * M_PI * i / 100.0;
    ring.points.push_back({5.0 * Vec3(std::cos(a), std::sin(a), 0), 0.0});
  }
  SpaciousnessTracker t;
  REQUIRE(t.update(ring) == Catch::Approx(5.0));

  // Constant stream converges to the measurement.
  for (int i = 0; i < 400; ++i) t.update(ring);
  REQUIRE(t.m == Catch::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("median matches a sort-based oracle on random clouds") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const StampedPointCloud c = random_cloud(251 + seed, 8.0, seed);
    std::vector<double> r;
    for (const Point& p : c.points) r.push_back(p.position.norm());
    std::sort(r.begin(), r.end());
    const std::size_t n = r.size();
    const double want =
        n % 2 == 1 ? r[n / 2] : 0.5 * (r[n / 2 - 1] + r[n / 2]);
    REQUIRE(SpaciousnessTracker::median_range(c) == Catch::Approx(want));
  }
}

TEST_CASE("global degeneracy arithmetic") {
  REQUIRE(global_degeneracy(Mat3::Identity(), 1.0, 1.0) == Catch::Approx(1.0));
  REQUIRE(global_degeneracy(Vec3(100, 100, 0.01).asDiagonal(), 10.0, 4.0) ==
          Catch::Approx(5000.0));

  SECTION("doubling m quadruples d") {
    const Mat3 h = Vec3(5, 3, 2).asDiagonal();
    REQUIRE(global_degeneracy(h, 2.0, 1.5) ==
            Catch::Approx(4.0 * global_degeneracy(h, 1.0, 1.5)));
  }

  SECTION("scaling all eigenvalues by c divides d by c") {
    const Mat3 h = Vec3(5, 3, 2).asDiagonal();
    const double c = 7.0;
    REQUIRE(global_degeneracy(Mat3(c * h), 2.0, 1.5) ==
            Catch::Approx(global_degeneracy(h, 2.0, 1.5) / c));
  }

  SECTION("zero eigenvalue yields the infinity sentinel") {
    REQUIRE(std::isinf(global_degeneracy(Vec3(1, 1, 0).asDiagonal(), 1.0, 1.0)));
  }

  SECTION("contract violations") {
    REQUIRE_THROWS_AS(global_degeneracy(Mat3::Identity(), 1.0, 0.0),
                      ContractViolation);
    Mat3 bad;
    bad << 1, 2, 0, 0, 1, 0, 0, 0, 1;
    REQUIRE_THROWS_AS(global_degeneracy(bad, 1.0, 1.0), ContractViolation);
  }
}

TEST_CASE("keyframe insertion triggers") {
  const StampedPointCloud c = random_cloud(100, 3.0, 5);
  const Keyframe last = simple_keyframe(0, Vec3::Zero(), c, 2.0);
  KeyframeThresholds th;

  SECTION("identical pose and degeneracy do not trigger") {
    const auto d = should_insert_keyframe(last.pose, 2.0, last, last, th);
    REQUIRE_FALSE(d.insert);
    REQUIRE(d.reason == KeyframeReason::none);
  }

  SECTION("translation trigger") {
    const RigidTransform pose(Quat::Identity(), Vec3(2, 0, 0));
    const auto d = should_insert_keyframe(pose, 2.0, last, last, th);
    REQUIRE(d.insert);
    REQUIRE(d.reason == KeyframeReason::translation);
  }

  SECTION("rotation trigger") {
    const RigidTransform pose(
        Quat(Eigen::AngleAxisd(0.6, Vec3::UnitZ())), Vec3::Zero());
    const auto d = should_insert_keyframe(pose, 2.0, last, last, th);
    REQUIRE(d.insert);
    REQUIRE(d.reason == KeyframeReason::rotation);
  }

  SECTION("degeneracy trigger fires before motion") {
    const RigidTransform pose(Quat::Identity(), Vec3(2, 0, 0));
    const auto d = should_insert_keyframe(pose, 10.0, last, last, th);
    REQUIRE(d.insert);
    REQUIRE(d.reason == KeyframeReason::degeneracy);
  }

  SECTION("unset baseline degeneracy disables that trigger") {
    const Keyframe no_d = simple_keyframe(0, Vec3::Zero(), c);
    const auto d = should_insert_keyframe(no_d.pose, 100.0, no_d, no_d, th);
    REQUIRE_FALSE(d.insert);
  }
}

TEST_CASE("jaccard basics") {
  const StampedPointCloud a = random_cloud(300, 4.0, 9);
  REQUIRE(jaccard(a, a, 0.5) == 1.0);

  StampedPointCloud far = a;
  for (Point& p : far.points) p.position += Vec3(100, 0, 0);
  REQUIRE(jaccard(a, far, 0.5) == 0.0);
}

TEST_CASE("jaccard on a constructed half-overlap pair is exactly 1/3") {
  // Two 100-point clouds sharing exactly 50 coincident points; spacing is
  // far above the correspondence distance.
  StampedPointCloud a, b;
  a.frame = b.frame = Frame::world;
  for (int i = 0; i < 100; ++i) a.points.push_back({Vec3(3.0 * i, 0, 0), 0.0});
  for (int i = 50; i < 150; ++i) b.points.push_back({Vec3(3.0 * i, 0, 0), 0.0});
  REQUIRE(jaccard(a, b, 0.5) == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("jaccard equals the brute-force oracle exactly") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    std::uniform_int_distribution<int> sz(40, 300);
    const StampedPointCloud a = random_cloud(sz(rng), 3.0, 1000 + trial);
    StampedPointCloud b = random_cloud(sz(rng), 3.0, 2000 + trial);
    // Overlay part of a into b to create genuine overlap.
    for (std::size_t i = 0; i < std::min<std::size_t>(a.size() / 2, b.size());
         ++i) {
      b.points[i] = a.points[i];
    }
    const double got = jaccard(a, b, 0.4);
    const double want = brute_force_jaccard(a, b, 0.4);
    REQUIRE(got == want);
  }
}

TEST_CASE("jaccard is symmetric and rigid-invariant") {
  const StampedPointCloud a = random_cloud(200, 3.0, 71);
  StampedPointCloud b = random_cloud(250, 3.0, 72);
  for (int i = 0; i < 120; ++i) b.points[i] = a.points[i];

  const double ab = jaccard(a, b, 0.4);
  const double ba = jaccard(b, a, 0.4);
  REQUIRE(ab == ba);

  const RigidTransform G(Quat(Eigen::AngleAxisd(1.1, Vec3(1, 2, 3).normalized())),
                         Vec3(5, -2, 1));
  const double moved = jaccard(transform_cloud(a, G), transform_cloud(b, G), 0.4);
  REQUIRE(moved == Catch::Approx(ab).margin(1e-12));
}

TEST_CASE("connectivity matrix grows symmetric with unit diagonal") {
  const StampedPointCloud base = random_cloud(150, 3.0, 55);
  std::vector<Keyframe> kfs;
  ConnectivityMatrix C;

  kfs.push_back(simple_keyframe(0, Vec3::Zero(), base));
  C = update_connectivity(std::move(C), kfs[0], std::span<const Keyframe>{}, 0.5);
  REQUIRE(C.size() == 1);
  REQUIRE(C.at(0, 0) == 1.0);

  // Duplicate cloud: off-diagonal overlap is exactly 1.
  kfs.push_back(simple_keyframe(1, Vec3::Zero(), base));
  C = update_connectivity(std::move(C), kfs[1],
                          std::span<const Keyframe>(kfs.data(), 1), 0.5);
  REQUIRE(C.at(0, 1) == 1.0);
  REQUIRE(C.at(1, 0) == 1.0);

  // Third keyframe partially overlapping; the incremental matrix matches a
  // full recompute of every pair.
  StampedPointCloud third = random_cloud(150, 3.0, 56);
  for (int i = 0; i < 60; ++i) third.points[i] = base.points[i];
  kfs.push_back(simple_keyframe(2, Vec3(1, 0, 0), third));
  C = update_connectivity(std::move(C), kfs[2],
                          std::span<const Keyframe>(kfs.data(), 2), 0.5);

  for (int i = 0; i < 3; ++i) {
    REQUIRE(C.at(i, i) == 1.0);
    for (int j = 0; j < 3; ++j) {
      REQUIRE(C.at(i, j) == C.at(j, i));
      if (i != j) {
        REQUIRE(C.at(i, j) == jaccard(kfs[i], kfs[j], 0.5));
      }
    }
  }
}

TEST_CASE("submap extraction selects by overlap with fallback") {
  const StampedPointCloud scan = box_room_cloud(Vec3::Zero(), Vec3(4, 4, 3), 0.3);
  const KdTree scan_tree(scan);

  StampedPointCloud far_cloud = scan;
  for (Point& p : far_cloud.points) p.position += Vec3(200, 0, 0);

  std::vector<Keyframe> kfs;
  kfs.push_back(simple_keyframe(0, Vec3::Zero(), scan));
  kfs.push_back(simple_keyframe(1, Vec3(200, 0, 0), far_cloud));

  SECTION("identical keyframe in, disjoint keyframe out") {
    const Submap sm = extract_submap(scan, scan_tree, kfs, 0.2, 0.5);
    REQUIRE(sm.keyframe_ids == std::vector<int>{0});
    REQUIRE(sm.cloud.size() == scan.size());
  }

  SECTION("single keyframe always wins by fallback") {
    std::vector<Keyframe> only_far(kfs.begin() + 1, kfs.end());
    const Submap sm = extract_submap(scan, scan_tree, only_far, 0.99, 0.5);
    REQUIRE(sm.keyframe_ids == std::vector<int>{1});
  }

  SECTION("point count is the sum over contributors") {
    const Submap sm = extract_submap(scan, scan_tree, kfs, 0.0, 0.5);
    REQUIRE(sm.cloud.size() == scan.size() + far_cloud.size());
    REQUIRE(sm.covariances.size() == sm.cloud.size());
  }
}

TEST_CASE("overlap selection beats nearest-neighbor selection on stacked floors") {
  // Robot sits on the upper floor. The lower-floor keyframe is spatially
  // nearest but shares no visible geometry; a same-floor keyframe farther
  // away shares plenty.
  const StampedPointCloud upper = box_room_cloud(Vec3(0, 0, 3.0), Vec3(6, 6, 2.5), 0.3);
  const StampedPointCloud upper_far =
      box_room_cloud(Vec3(2.0, 0, 3.0), Vec3(6, 6, 2.5), 0.3);
  const StampedPointCloud lower = box_room_cloud(Vec3(0, 0, 0.0), Vec3(6, 6, 2.5), 0.3);

  std::vector<Keyframe> kfs;
  kfs.push_back(simple_keyframe(0, Vec3(0, 0, -0.5), lower));      // 1 m below
  kfs.push_back(simple_keyframe(1, Vec3(2.0, 0, 0.55), upper_far));  // same floor

  const Vec3 robot(0, 0, 0.5);
  const KdTree scan_tree(upper);
  const Submap sm = extract_submap(upper, scan_tree, kfs, 0.2, 0.5);

  // A pure nearest-neighbor selector would pick keyframe 0.
  const double d0 = (kfs[0].pose.translation - robot).norm();
  const double d1 = (kfs[1].pose.translation - robot).norm();
  REQUIRE(d0 < d1);
  REQUIRE(std::find(sm.keyframe_ids.begin(), sm.keyframe_ids.end(), 0) ==
          sm.keyframe_ids.end());
  REQUIRE(std::find(sm.keyframe_ids.begin(), sm.keyframe_ids.end(), 1) !=
          sm.keyframe_ids.end());
}
