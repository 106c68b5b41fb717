// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_SIM_WORLD_HPP
#define LIO_SIM_WORLD_HPP

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "lio/errors.hpp"
#include "lio/geometry.hpp"

namespace lio::sim {

/// Axis-aligned box. Rays hit the nearest face crossing: the entry face
/// from outside (solid block), the exit face from inside (room shell).
struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};

/// Finite rectangle: origin plus two orthogonal unit spans.
struct Panel {
  Vec3 origin = Vec3::Zero();
  Vec3 u_dir = Vec3::UnitX();
  Vec3 v_dir = Vec3::UnitY();
  double u_len = 1.0;
  double v_len = 1.0;
};

namespace detail {

constexpr double kRayEps = 1e-9;

inline std::optional<double> hit_box(const Box& b, const Vec3& o, const Vec3& d) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (o[k] < b.min[k] || o[k] > b.max[k]) return std::nullopt;
      continue;
    }
    double t0 = (b.min[k] - o[k]) / d[k];
    double t1 = (b.max[k] - o[k]) / d[k];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit) return std::nullopt;
  if (t_enter > kRayEps) return t_enter;
  if (t_exit > kRayEps) return t_exit;
  return std::nullopt;
}

inline std::optional<double> hit_plane(const Plane& p, const Vec3& o,
                                       const Vec3& d) {
  const double denom = d.dot(p.normal);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = (p.point - o).dot(p.normal) / denom;
  if (t > kRayEps) return t;
  return std::nullopt;
}

inline std::optional<double> hit_panel(const Panel& p, const Vec3& o,
                                       const Vec3& d) {
  const Vec3 n = p.u_dir.cross(p.v_dir);
  const double denom = d.dot(n);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = (p.origin - o).dot(n) / denom;
  if (t <= kRayEps) return std::nullopt;
  const Vec3 rel = o + t * d - p.origin;
  const double u = rel.dot(p.u_dir);
  const double v = rel.dot(p.v_dir);
  if (u < 0.0 || u > p.u_len || v < 0.0 || v > p.v_len) return std::nullopt;
  return t;
}

}  // namespace detail

struct World {
  std::vector<Box> boxes;
  std::vector<Plane> planes;
  std::vector<Panel> panels;

  bool empty() const { return boxes.empty() && planes.empty() && panels.empty(); }

  /// Distance to the nearest surface along the ray, if within max_range.
  std::optional<double> raycast(const Vec3& origin, const Vec3& dir,
                                double max_range) const {
    double best = max_range;
    bool found = false;
    auto consider = [&](const std::optional<double>& t) {
      if (t.has_value() && *t <= best) {
        best = *t;
        found = true;
      }
    };
    for (const Box& b : boxes) consider(detail::hit_box(b, origin, dir));
    for (const Plane& p : planes) consider(detail::hit_plane(p, origin, dir));
    for (const Panel& p : panels) consider(detail::hit_panel(p, origin, dir));
    if (!found) return std::nullopt;
    return best;
  }
};

/// Rectangular room shell centered at `center`.
inline World world_room(const Vec3& center = Vec3(0, 0, 1.3),
                        const Vec3& size = Vec3(6, 5, 2.6)) {
  World w;
  w.boxes.push_back(Box{center - size / 2, center + size / 2});
  return w;
}

/// Corridor running along y: floor, ceiling and two walls, unbounded along
/// the corridor axis.
inline World world_corridor(double width = 3.0, double height = 2.6) {
  World w;
  w.planes.push_back(Plane{Vec3(0, 0, 0), Vec3::UnitZ()});
  w.planes.push_back(Plane{Vec3(0, 0, height), -Vec3::UnitZ()});
  w.planes.push_back(Plane{Vec3(-width / 2, 0, 0), Vec3::UnitX()});
  w.planes.push_back(Plane{Vec3(width / 2, 0, 0), -Vec3::UnitX()});
  return w;
}

namespace detail {

inline void add_wall_x(World& w, double x, double y0, double y1, double z0,
                       double z1) {
  w.panels.push_back(Panel{Vec3(x, y0, z0), Vec3::UnitY(), Vec3::UnitZ(),
                           y1 - y0, z1 - z0});
}

inline void add_wall_y(World& w, double y, double x0, double x1, double z0,
                       double z1) {
  w.panels.push_back(Panel{Vec3(x0, y, z0), Vec3::UnitX(), Vec3::UnitZ(),
                           x1 - x0, z1 - z0});
}

inline void add_slab(World& w, double z, double x0, double x1, double y0,
                     double y1) {
  w.panels.push_back(Panel{Vec3(x0, y0, z), Vec3::UnitX(), Vec3::UnitY(),
                           x1 - x0, y1 - y0});
}

}  // namespace detail

/// A small room opening through a doorway into a much larger hall; the
/// abrupt scale change is the scene transition. Room: x in [0,4]; hall:
/// x in [4,16]; door at x=4, y in [-0.6, 0.6], z up to 2.0.
inline World world_doorway() {
  World w;
  detail::add_slab(w, 0.0, 0.0, 16.0, -6.0, 6.0);  // shared floor
  // Room shell (2.5 m ceiling).
  detail::add_slab(w, 2.5, 0.0, 4.0, -2.0, 2.0);
  detail::add_wall_x(w, 0.0, -2.0, 2.0, 0.0, 2.5);
  detail::add_wall_y(w, -2.0, 0.0, 4.0, 0.0, 2.5);
  detail::add_wall_y(w, 2.0, 0.0, 4.0, 0.0, 2.5);
  // Dividing wall with the door opening.
  detail::add_wall_x(w, 4.0, -6.0, -0.6, 0.0, 4.0);
  detail::add_wall_x(w, 4.0, 0.6, 6.0, 0.0, 4.0);
  detail::add_wall_x(w, 4.0, -0.6, 0.6, 2.0, 4.0);  // lintel
  // Hall shell (4 m ceiling).
  detail::add_slab(w, 4.0, 4.0, 16.0, -6.0, 6.0);
  detail::add_wall_x(w, 16.0, -6.0, 6.0, 0.0, 4.0);
  detail::add_wall_y(w, -6.0, 4.0, 16.0, 0.0, 4.0);
  detail::add_wall_y(w, 6.0, 4.0, 16.0, 0.0, 4.0);
  return w;
}

/// Two stacked 6x6 rooms connected by a 2x2 opening in the dividing slab at
/// z = 3 (corner x,y in [4,6]). Same footprint, no lateral overlap in what
/// the sensor sees from each floor.
inline World world_staircase() {
  World w;
  detail::add_slab(w, 0.0, 0.0, 6.0, 0.0, 6.0);  // ground floor
  // Dividing slab with the stairwell opening.
  detail::add_slab(w, 3.0, 0.0, 4.0, 0.0, 6.0);
  detail::add_slab(w, 3.0, 4.0, 6.0, 0.0, 4.0);
  detail::add_slab(w, 6.0, 0.0, 6.0, 0.0, 6.0);  // roof
  detail::add_wall_x(w, 0.0, 0.0, 6.0, 0.0, 6.0);
  detail::add_wall_x(w, 6.0, 0.0, 6.0, 0.0, 6.0);
  detail::add_wall_y(w, 0.0, 0.0, 6.0, 0.0, 6.0);
  detail::add_wall_y(w, 6.0, 0.0, 6.0, 0.0, 6.0);
  return w;
}

/// Closed ring corridor: outer shell minus an inner block, 4 m wide lanes.
inline World world_square_loop() {
  World w;
  w.boxes.push_back(Box{Vec3(-10, -10, 0), Vec3(10, 10, 3)});   // outer shell
  w.boxes.push_back(Box{Vec3(-6, -6, -0.5), Vec3(6, 6, 3.5)});  // inner block
  return w;
}

/// Plain box hall of the given horizontal scale (criterion comparisons
/// between small and large environments).
inline World world_hall(double scale, double height = 2.6) {
  World w;
  w.boxes.push_back(
      Box{Vec3(-scale / 2, -scale / 2, 0), Vec3(scale / 2, scale / 2, height)});
  return w;
}

}  // namespace lio::sim

#endif  // LIO_SIM_WORLD_HPP
