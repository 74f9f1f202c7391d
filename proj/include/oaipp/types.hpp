// Common geometric types and the error hierarchy shared by every oaipp module.

#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace oaipp {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Invalid or inconsistent configuration values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query fell outside the volume a structure was built for.
class OutOfBoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Axis-aligned box in world coordinates (meters).
struct Bounds {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  [[nodiscard]] Vec3 extent() const { return max - min; }

  [[nodiscard]] bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }

  [[nodiscard]] Vec3 clamp(const Vec3& p) const {
    return p.cwiseMax(min).cwiseMin(max);
  }
};

using Waypoints = std::vector<Vec3>;

}  // namespace oaipp
