// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_KDTREE_HPP
#define LIO_KDTREE_HPP

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "lio/geometry.hpp"
#include "lio/point_cloud.hpp"

namespace lio {

/// Balanced k-d tree over 3-vectors, read-only after construction.
///
/// Queries are exact. Equal distances are broken by insertion order so that
/// results are reproducible across runs and against a brute-force oracle.
class KdTree {
 public:
  struct Hit {
    int index = -1;
    double distance = 0.0;
  };

  KdTree() = default;

  explicit KdTree(std::span<const Vec3> pts, int leaf_size = 16)
      : points_(pts.begin(), pts.end()), leaf_size_(std::max(1, leaf_size)) {
    build();
  }

  explicit KdTree(const StampedPointCloud& cloud, int leaf_size = 16)
      : leaf_size_(std::max(1, leaf_size)) {
    points_.reserve(cloud.size());
    for (const Point& p : cloud.points) points_.push_back(p.position);
    build();
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec3& point(int i) const { return points_[static_cast<std::size_t>(i)]; }

  /// The k nearest points to the query, sorted by nondecreasing distance,
  /// ties by insertion order. Returns min(k, size()) hits.
  std::vector<Hit> knn(const Vec3& query, int k) const {
    std::vector<Hit> out;
    if (k <= 0 || points_.empty()) return out;
    SearchState s;
    s.k = static_cast<std::size_t>(k);
    search(0, query, s);
    out.reserve(s.heap.size());
    for (const HeapEntry& e : s.heap) out.push_back(Hit{e.index, std::sqrt(e.d2)});
    std::sort(out.begin(), out.end(), [](const Hit& a, const Hit& b) {
      if (a.distance != b.distance) return a.distance < b.distance;
      return a.index < b.index;
    });
    return out;
  }

  /// Nearest point within max_dist, or index -1.
  Hit nearest_within(const Vec3& query, double max_dist) const {
    auto hits = knn(query, 1);
    if (hits.empty() || hits[0].distance > max_dist) return Hit{-1, 0.0};
    return hits[0];
  }

 private:
  struct Node {
    int axis = -1;           // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  struct HeapEntry {
    double d2;
    int index;
    bool operator<(const HeapEntry& o) const {
      if (d2 != o.d2) return d2 < o.d2;
      return index < o.index;  // larger index counts as farther
    }
  };

  struct SearchState {
    std::size_t k = 0;
    std::vector<HeapEntry> heap;  // max-heap on (d2, index)

    double worst() const {
      return heap.size() < k ? std::numeric_limits<double>::infinity()
                             : heap.front().d2;
    }
    void offer(double d2, int index) {
      HeapEntry e{d2, index};
      if (heap.size() < k) {
        heap.push_back(e);
        std::push_heap(heap.begin(), heap.end());
      } else if (e < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = e;
        std::push_heap(heap.begin(), heap.end());
      }
    }
  };

  void build() {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.clear();
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / static_cast<std::size_t>(leaf_size_) + 8);
      build_range(0, static_cast<int>(points_.size()));
    }
  }

  int build_range(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{});
    if (end - begin <= leaf_size_) {
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }
    // Split the widest dimension at the median for balance.
    Vec3 lo = points_[order_[begin]], hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end, [&](int a, int b) {
                       const double va = points_[a][axis], vb = points_[b][axis];
                       if (va != vb) return va < vb;
                       return a < b;
                     });
    nodes_[id].axis = axis;
    nodes_[id].split = points_[order_[mid]][axis];
    nodes_[id].left = build_range(begin, mid);
    nodes_[id].right = build_range(mid, end);
    return id;
  }

  void search(int node_id, const Vec3& q, SearchState& s) const {
    const Node& n = nodes_[node_id];
    if (n.axis < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const int idx = order_[i];
        s.offer((points_[idx] - q).squaredNorm(), idx);
      }
      return;
    }
    const double delta = q[n.axis] - n.split;
    const int near = delta < 0.0 ? n.left : n.right;
    const int far = delta < 0.0 ? n.right : n.left;
    search(near, q, s);
    if (delta * delta <= s.worst()) search(far, q, s);
  }

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int leaf_size_ = 16;
};

}  // namespace lio

#endif  // LIO_KDTREE_HPP
