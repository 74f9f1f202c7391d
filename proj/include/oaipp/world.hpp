// Known cluttered flight volume: box obstacles plus a voxelized signed
// distance field used for collision costs and line-of-sight checks.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include "oaipp/trajectory.hpp"
#include "oaipp/types.hpp"

namespace oaipp {

struct BoxObstacle {
  Vec3 min_corner;
  Vec3 max_corner;

  /// Exact signed Euclidean distance from p to the box surface; negative inside.
  [[nodiscard]] double signed_distance(const Vec3& p) const {
    const Vec3 below = min_corner - p;
    const Vec3 above = p - max_corner;
    const Vec3 outside = below.cwiseMax(above).cwiseMax(0.0);
    const double out = outside.norm();
    if (out > 0.0) return out;
    // Inside or on the surface: distance to the nearest face, negated.
    const double inner = std::min(below.cwiseAbs().minCoeff(), above.cwiseAbs().minCoeff());
    return -inner;
  }

  [[nodiscard]] bool valid() const {
    return (min_corner.array() < max_corner.array()).all();
  }
};

/// Distance from a point inside `b` to the nearest face of `b`.
inline double distance_to_bounds(const Bounds& b, const Vec3& p) {
  return std::min((p - b.min).minCoeff(), (b.max - p).minCoeff());
}

/// Signed distance grid sampled at voxel centers over `bounds`.
///
/// When `include_bounds` is set, the volume boundary acts as an obstacle wall
/// (distance = min(obstacle distance, distance to the boundary)), which keeps
/// planned flight inside the volume. Without it an empty world reports
/// +infinity everywhere.
class EsdfWorld {
 public:
  EsdfWorld() = default;

  EsdfWorld(std::vector<BoxObstacle> obstacles, const Bounds& bounds,
            double voxel_size, bool include_bounds)
      : obstacles_(std::move(obstacles)),
        bounds_(bounds),
        voxel_size_(voxel_size),
        include_bounds_(include_bounds) {
    if (!(voxel_size > 0.0)) throw ConfigError("voxel_size must be > 0");
    if (!(bounds.min.array() < bounds.max.array()).all()) {
      throw ConfigError("world bounds must have positive extent");
    }
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
      const auto& box = obstacles_[i];
      if (!box.valid() || !bounds.contains(box.min_corner) ||
          !bounds.contains(box.max_corner)) {
        std::ostringstream msg;
        msg << "obstacle " << i << " is degenerate or outside the world bounds";
        throw ConfigError(msg.str());
      }
    }
    for (int a = 0; a < 3; ++a) {
      dims_[a] = std::max(1, static_cast<int>(std::ceil(bounds.extent()[a] / voxel_size - 1e-9)));
    }
    distances_.resize(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2]);
    for (int k = 0; k < dims_[2]; ++k) {
      for (int j = 0; j < dims_[1]; ++j) {
        for (int i = 0; i < dims_[0]; ++i) {
          distances_[index(i, j, k)] = exact_distance(voxel_center(i, j, k));
        }
      }
    }
  }

  [[nodiscard]] const Bounds& bounds() const { return bounds_; }
  [[nodiscard]] double voxel_size() const { return voxel_size_; }
  [[nodiscard]] bool include_bounds() const { return include_bounds_; }
  [[nodiscard]] const std::vector<BoxObstacle>& obstacles() const { return obstacles_; }
  [[nodiscard]] std::array<int, 3> dims() const { return dims_; }

  [[nodiscard]] Vec3 voxel_center(int i, int j, int k) const {
    return bounds_.min + voxel_size_ * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }

  [[nodiscard]] double voxel(int i, int j, int k) const { return distances_[index(i, j, k)]; }

  /// Analytic signed distance at p (what each voxel stores).
  [[nodiscard]] double exact_distance(const Vec3& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& box : obstacles_) d = std::min(d, box.signed_distance(p));
    if (include_bounds_) d = std::min(d, distance_to_bounds(bounds_, p));
    return d;
  }

  /// Trilinear interpolation of the voxel grid. Outside the lattice of voxel
  /// centers (but inside the bounds) the nearest lattice value is held.
  [[nodiscard]] double query(const Vec3& p) const {
    if (!bounds_.contains(p)) {
      std::ostringstream msg;
      msg << "esdf query (" << p.x() << ", " << p.y() << ", " << p.z() << ") outside world bounds";
      throw OutOfBoundsError(msg.str());
    }
    if (obstacles_.empty() && !include_bounds_) {
      return std::numeric_limits<double>::infinity();
    }
    std::array<int, 3> lo{};
    std::array<double, 3> frac{};
    for (int a = 0; a < 3; ++a) {
      const double u = std::clamp((p[a] - bounds_.min[a]) / voxel_size_ - 0.5, 0.0,
                                  static_cast<double>(dims_[a] - 1));
      if (dims_[a] == 1) {
        lo[a] = 0;
        frac[a] = 0.0;
        continue;
      }
      lo[a] = std::min(static_cast<int>(std::floor(u)), dims_[a] - 2);
      frac[a] = u - lo[a];
    }
    double value = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
      double w = 1.0;
      std::array<int, 3> idx{};
      for (int a = 0; a < 3; ++a) {
        const int bit = (corner >> a) & 1;
        w *= bit ? frac[a] : 1.0 - frac[a];
        idx[a] = std::min(lo[a] + bit, dims_[a] - 1);
      }
      if (w == 0.0) continue;
      value += w * distances_[index(idx[0], idx[1], idx[2])];
    }
    return value;
  }

  /// True if segment ab cannot come within `margin` of any obstacle. Used to
  /// skip ESDF sampling far away from every box.
  [[nodiscard]] bool segment_clear_of_boxes(const Vec3& a, const Vec3& b, double margin) const {
    for (const auto& box : obstacles_) {
      if (segment_hits_box(a, b, box.min_corner.array() - margin, box.max_corner.array() + margin)) {
        return false;
      }
    }
    return true;
  }

 private:
  [[nodiscard]] std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i;
  }

  // Slab test for the closed segment against an axis-aligned box.
  static bool segment_hits_box(const Vec3& a, const Vec3& b, const Eigen::Array3d& lo,
                               const Eigen::Array3d& hi) {
    double t0 = 0.0;
    double t1 = 1.0;
    const Vec3 d = b - a;
    for (int axis = 0; axis < 3; ++axis) {
      if (std::abs(d[axis]) < 1e-15) {
        if (a[axis] < lo[axis] || a[axis] > hi[axis]) return false;
        continue;
      }
      double ta = (lo[axis] - a[axis]) / d[axis];
      double tb = (hi[axis] - a[axis]) / d[axis];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return false;
    }
    return true;
  }

  std::vector<BoxObstacle> obstacles_;
  Bounds bounds_;
  double voxel_size_ = 0.5;
  bool include_bounds_ = true;
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<double> distances_;
};

inline EsdfWorld build_esdf(std::vector<BoxObstacle> obstacles, const Bounds& bounds,
                            double voxel_size = 0.5, bool include_bounds = true) {
  return EsdfWorld(std::move(obstacles), bounds, voxel_size, include_bounds);
}

inline double esdf_query(const EsdfWorld& world, const Vec3& p) { return world.query(p); }

/// 0 when the UAV sphere of radius r_uav/2 around p is clear, 1 otherwise.
/// Points outside the volume count as collisions.
inline int hard_collision_cost(const EsdfWorld& world, const Vec3& p, double r_uav) {
  if (!(r_uav > 0.0)) throw ConfigError("r_uav must be > 0");
  if (!world.bounds().contains(p)) return 1;
  return world.query(p) >= r_uav / 2.0 ? 0 : 1;
}

/// Number of subdivisions of a segment so that every piece is <= spacing.
/// Powers of two make halving the spacing produce a superset of samples.
inline std::size_t refinement_pieces(double length, double spacing) {
  std::size_t pieces = 1;
  while (length / static_cast<double>(pieces) > spacing) pieces *= 2;
  return pieces;
}

/// Sum of hard collision costs over points sampled along the path geometry.
/// Quintic rest-to-rest segments stay on the straight line between their
/// waypoints, so sampling the polyline covers every position the UAV visits.
inline int path_collision_cost(const EsdfWorld& world, const Trajectory& traj,
                               double sample_spacing, double r_uav) {
  if (!(sample_spacing > 0.0)) throw ConfigError("sample_spacing must be > 0");
  int cost = 0;
  const auto& segments = traj.segments();
  if (segments.empty()) {
    for (const auto& w : traj.waypoints()) cost += hard_collision_cost(world, w, r_uav);
    return cost;
  }
  const double inflate = r_uav / 2.0 + world.voxel_size() * std::sqrt(3.0);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Vec3& a = segments[s].start;
    const Vec3& b = segments[s].end;
    const std::size_t pieces = refinement_pieces((b - a).norm(), sample_spacing);
    const std::size_t first = s == 0 ? 0 : 1;  // joints are counted once
    const bool inside = world.bounds().contains(a) && world.bounds().contains(b);
    // Distance to the volume walls is concave along a segment, so checking the
    // endpoints bounds it everywhere.
    const bool walls_clear = !world.include_bounds() ||
                             (distance_to_bounds(world.bounds(), a) >= inflate &&
                              distance_to_bounds(world.bounds(), b) >= inflate);
    if (inside && walls_clear && world.segment_clear_of_boxes(a, b, inflate)) continue;
    for (std::size_t i = first; i <= pieces; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(pieces);
      cost += hard_collision_cost(world, (1.0 - u) * a + u * b, r_uav);
    }
  }
  return cost;
}

/// True when no sample along ab (spacing <= voxel_size / 2) has a negative
/// signed distance.
inline bool line_of_sight(const EsdfWorld& world, const Vec3& a, const Vec3& b) {
  if (world.obstacles().empty()) return true;
  if (world.segment_clear_of_boxes(a, b, world.voxel_size() * std::sqrt(3.0))) return true;
  const double length = (b - a).norm();
  const std::size_t pieces =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / (world.voxel_size() / 2.0))));
  for (std::size_t i = 0; i <= pieces; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(pieces);
    const Vec3 p = (1.0 - u) * a + u * b;
    if (!world.bounds().contains(p)) return false;
    if (world.query(p) < 0.0) return false;
  }
  return true;
}

}  // namespace oaipp
