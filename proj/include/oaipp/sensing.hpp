// Nadir camera footprint, occlusion culling, altitude-dependent detector
// noise and performance, and a synthetic detector driven by ground truth.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "oaipp/fieldmap.hpp"
#include "oaipp/world.hpp"

namespace oaipp {

/// Full field-of-view angles in degrees. The along-track angle spans the x
/// axis of the ground grid and the cross-track angle spans y.
struct CameraModel {
  double fov_along_deg = 45.0;
  double fov_cross_deg = 60.0;
  double frequency = 0.15;  // Hz

  void validate() const {
    if (!(fov_along_deg > 0.0 && fov_along_deg < 180.0 && fov_cross_deg > 0.0 &&
          fov_cross_deg < 180.0)) {
      throw ConfigError("camera FoV angles must lie in (0, 180) degrees");
    }
    if (!(frequency > 0.0)) throw ConfigError("measurement frequency must be > 0");
  }
};

/// sigma^2(h) = A (1 - exp(-B h))
struct SensorNoiseModel {
  double A = 1.0;
  double B = 0.05;
};

struct PerformanceModel {
  double h_opt = 10.0;
  double sigma1 = 7.0;
  double h_sat = 26.0;
};

/// Smallest variance handed to the filter; keeps the innovation covariance
/// invertible for near-noiseless sensors.
inline constexpr double kMinNoiseVariance = 1e-9;

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Ground half-extents (x, y) of the footprint seen from altitude h.
inline Vec2 footprint_half_extents(double h, const CameraModel& cam) {
  return Vec2(h * std::tan(deg2rad(cam.fov_along_deg) / 2.0),
              h * std::tan(deg2rad(cam.fov_cross_deg) / 2.0));
}

/// Cells whose centers fall inside the projected rectangle, clipped to the grid.
inline std::vector<int> camera_footprint(const Vec3& pose, const CameraModel& cam,
                                         const GridSpec& grid) {
  std::vector<int> cells;
  if (!(pose.z() > 0.0)) return cells;
  const Vec2 half = footprint_half_extents(pose.z(), cam);
  const double res = grid.resolution;
  // center(c) = origin + (c + 0.5) res must lie within [x - hx, x + hx].
  const auto first = [&](double lo, double origin) {
    return static_cast<int>(std::ceil((lo - origin) / res - 0.5));
  };
  const auto last = [&](double hi, double origin) {
    return static_cast<int>(std::floor((hi - origin) / res - 0.5));
  };
  const int c0 = std::max(0, first(pose.x() - half.x(), grid.origin.x()));
  const int c1 = std::min(grid.cols - 1, last(pose.x() + half.x(), grid.origin.x()));
  const int r0 = std::max(0, first(pose.y() - half.y(), grid.origin.y()));
  const int r1 = std::min(grid.rows - 1, last(pose.y() + half.y(), grid.origin.y()));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) cells.push_back(grid.index(r, c));
  }
  return cells;
}

inline std::vector<int> camera_footprint(const Vec3& pose, const CameraModel& cam,
                                         const FieldMap& field) {
  return camera_footprint(pose, cam, field.grid);
}

/// Ground point of a cell center in world coordinates (z = 0 plane of the grid).
inline Vec3 cell_ground_point(const GridSpec& grid, int idx, double ground_z = 0.0) {
  const Vec2 c = grid.center(idx);
  return Vec3(c.x(), c.y(), ground_z);
}

/// Point a nadir camera images at a cell center: the ground, or the roof of
/// the tallest box covering the center, lifted one voxel diagonal so the
/// interpolated distance field is non-negative there.
inline Vec3 cell_surface_point(const EsdfWorld& world, const GridSpec& grid, int idx) {
  Vec3 p = cell_ground_point(grid, idx, world.bounds().min.z());
  for (const auto& box : world.obstacles()) {
    if (p.x() >= box.min_corner.x() && p.x() <= box.max_corner.x() && p.y() >= box.min_corner.y() &&
        p.y() <= box.max_corner.y()) {
      p.z() = std::max(p.z(), box.max_corner.z() + world.voxel_size() * std::sqrt(3.0));
    }
  }
  return p;
}

/// Keeps the cells whose surface points are in line of sight of the pose.
inline std::vector<int> visible_cells(const EsdfWorld& world, const Vec3& pose,
                                      const std::vector<int>& cells, const GridSpec& grid) {
  if (world.obstacles().empty()) return cells;
  std::vector<int> kept;
  kept.reserve(cells.size());
  for (int c : cells) {
    const Vec3 target = cell_surface_point(world, grid, c);
    if (world.bounds().contains(target) && line_of_sight(world, pose, target)) kept.push_back(c);
  }
  return kept;
}

inline std::vector<int> visible_cells(const EsdfWorld& world, const Vec3& pose,
                                      const std::vector<int>& cells, const FieldMap& field) {
  return visible_cells(world, pose, cells, field.grid);
}

/// Occlusion-aware footprint.
inline std::vector<int> visible_footprint(const EsdfWorld& world, const Vec3& pose,
                                          const CameraModel& cam, const GridSpec& grid) {
  return visible_cells(world, pose, camera_footprint(pose, cam, grid), grid);
}

inline double detection_noise_variance(double h, const SensorNoiseModel& nm) {
  return nm.A * (1.0 - std::exp(-nm.B * h));
}

/// Variance actually used by the filter for a measurement at altitude h.
inline double fusion_noise_variance(double h, const SensorNoiseModel& nm) {
  return std::max(detection_noise_variance(h, nm), kMinNoiseVariance);
}

/// Normal density N(h_opt, sigma1) below the saturation altitude, else 0.
inline double performance_weight(double h, const PerformanceModel& pm) {
  if (h >= pm.h_sat) return 0.0;
  const double z = (h - pm.h_opt) / pm.sigma1;
  return std::exp(-0.5 * z * z) / (pm.sigma1 * std::sqrt(2.0 * std::numbers::pi));
}

/// Adds a spurious +offset to one off-target visible cell of a detection.
struct FalsePositiveInjector {
  bool enabled = false;
  double probability = 0.05;  // chance per mission
  double offset = 1.0;
};

/// Fraction of a target's contrast the detector reports at altitude h: the
/// performance curve normalized to 1 at h_opt, 0 from h_sat up.
inline double detection_recall(double h, const PerformanceModel& pm) {
  if (h >= pm.h_sat) return 0.0;
  const double z = (h - pm.h_opt) / pm.sigma1;
  return std::exp(-0.5 * z * z);
}

/// Synthetic detector: recall * truth plus zero-mean Gaussian noise whose
/// variance is the altitude-dependent detector noise. Deterministic in `seed`.
inline Detection simulate_detection(const GroundTruth& truth, const Vec3& pose,
                                    const EsdfWorld& world, const CameraModel& cam,
                                    const SensorNoiseModel& nm, std::uint64_t seed,
                                    double recall = 1.0) {
  Detection det;
  det.pose = pose;
  det.noise_variance = fusion_noise_variance(std::max(pose.z(), 0.0), nm);
  if (!(pose.z() > 0.0)) return det;
  det.cell_indices = visible_footprint(world, pose, cam, truth.grid);
  const double sigma = std::sqrt(std::max(detection_noise_variance(pose.z(), nm), 0.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  det.values.reserve(det.cell_indices.size());
  for (int c : det.cell_indices) {
    const double eps = noise(rng);
    det.values.push_back(recall * truth.at(c) + sigma * eps);
  }
  return det;
}

/// Applies the injector to `det` in place. Returns the corrupted cell or -1.
inline int inject_false_positive(Detection& det, const GroundTruth& truth,
                                 const FalsePositiveInjector& fp, std::mt19937_64& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < det.cell_indices.size(); ++i) {
    if (truth.at(det.cell_indices[i]) == 0.0) candidates.push_back(i);
  }
  if (candidates.empty()) return -1;
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  const std::size_t slot = candidates[pick(rng)];
  det.values[slot] += fp.offset;
  return det.cell_indices[slot];
}

}  // namespace oaipp
