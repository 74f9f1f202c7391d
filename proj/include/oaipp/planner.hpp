// Two-stage path search: greedy next-best-viewpoint initialization followed
// by CMA-ES refinement of the free waypoints.

#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "oaipp/cmaes.hpp"
#include "oaipp/objectives.hpp"

namespace oaipp {

/// Everything the planner needs besides the belief itself.
struct PlanningContext {
  const EsdfWorld* world = nullptr;
  CameraModel camera;
  SpeedLimits limits;
  ObjectiveConfig objective;
  int nbv_samples = 100;
  double measurement_phase = 0.0;  // time from path start to the next sensor tick
};

struct ViewpointChoice {
  Vec3 point = Vec3::Zero();
  double value = -std::numeric_limits<double>::infinity();
  bool degenerate = false;  // no valid candidate, hovering at the start pose
};

/// Uniform candidate positions over the flight volume, in draw order.
inline std::vector<Vec3> sample_candidates(const Bounds& volume, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(volume.min.x(), volume.max.x());
  std::uniform_real_distribution<double> uy(volume.min.y(), volume.max.y());
  std::uniform_real_distribution<double> uz(volume.min.z(), volume.max.z());
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    const double z = uz(rng);
    out.emplace_back(x, y, z);
  }
  return out;
}

/// True if `candidate` may be used as a viewpoint reached from `from`.
inline bool admissible_viewpoint(const EsdfWorld& world, const Vec3& from, const Vec3& candidate,
                                 double r_uav) {
  return hard_collision_cost(world, candidate, r_uav) == 0 && line_of_sight(world, from, candidate);
}

/// Best of `candidates` by the single-view objective; first wins on ties.
inline ViewpointChoice best_viewpoint(const FieldMap& field, const PlanningContext& ctx, const Vec3& from,
                                      const std::vector<Vec3>& candidates) {
  const EsdfWorld& world = *ctx.world;
  ViewpointChoice choice;
  bool found = false;
  for (const auto& c : candidates) {
    if (!admissible_viewpoint(world, from, c, ctx.objective.r_uav)) continue;
    const double value = evaluate_viewpoint(from, c, field, world, ctx.objective, ctx.camera, ctx.limits).value;
    if (!found || value > choice.value) {
      choice.point = c;
      choice.value = value;
      found = true;
    }
  }
  if (!found) {
    choice.point = from;
    choice.degenerate = true;
  }
  return choice;
}

inline ViewpointChoice next_best_viewpoint(const FieldMap& field, const PlanningContext& ctx, const Vec3& from,
                                           std::mt19937_64& rng) {
  return best_viewpoint(field, ctx, from, sample_candidates(ctx.world->bounds(), ctx.nbv_samples, rng));
}

/// Greedy chain of N waypoints starting at r0. After each accepted viewpoint
/// a covariance-only measurement is simulated on a private copy of the belief.
inline Waypoints coarse_greedy_search(const FieldMap& field, const PlanningContext& ctx, const Vec3& r0, int n,
                                      std::mt19937_64& rng, int* degenerate_count = nullptr) {
  if (n < 2) throw ConfigError("a plan needs at least two waypoints");
  Waypoints path{r0};
  FieldMap sim = field;
  for (int i = 1; i < n; ++i) {
    const ViewpointChoice nbv = next_best_viewpoint(sim, ctx, path.back(), rng);
    if (nbv.degenerate && degenerate_count) ++*degenerate_count;
    path.push_back(nbv.point);
    const auto cells = visible_footprint(*ctx.world, nbv.point, ctx.camera, sim.grid);
    fuse_covariance_only(sim, cells, fusion_noise_variance(std::max(nbv.point.z(), 0.0), ctx.objective.noise));
  }
  return path;
}

inline Eigen::VectorXd pack_free_waypoints(const Waypoints& path) {
  Eigen::VectorXd x(3 * static_cast<Eigen::Index>(path.size() - 1));
  for (std::size_t i = 1; i < path.size(); ++i) x.segment<3>(3 * static_cast<Eigen::Index>(i - 1)) = path[i];
  return x;
}

inline Waypoints unpack_waypoints(const Vec3& first, const Eigen::VectorXd& x, const Bounds& bounds) {
  Waypoints path{first};
  for (Eigen::Index i = 0; i + 2 < x.size(); i += 3) path.push_back(bounds.clamp(x.segment<3>(i)));
  return path;
}

struct RefinedPath {
  Waypoints waypoints;
  double value = 0.0;
  double initial_value = 0.0;
  CmaesResult search;
};

/// Default CMA-ES step: 10% of the smallest world extent.
inline double default_sigma0(const Bounds& bounds) { return 0.1 * bounds.extent().minCoeff(); }

/// CMA-ES over waypoints 2..N minimizing the negated objective. Waypoint 1
/// stays at the current pose; coordinates are clamped into the world bounds.
inline RefinedPath refine_path(const Waypoints& initial, const FieldMap& field, const PlanningContext& ctx,
                               const CmaesOptions& opts, bool keep_trace = false) {
  if (initial.size() < 2) throw ConfigError("a plan needs at least two waypoints");
  const EsdfWorld& world = *ctx.world;
  const Vec3 first = initial.front();
  const auto cost = [&](const Eigen::VectorXd& x) {
    return -objective(unpack_waypoints(first, x, world.bounds()), field, world, ctx.objective, ctx.camera,
                      ctx.limits, ctx.measurement_phase);
  };
  RefinedPath out;
  out.search = cmaes_minimize(cost, pack_free_waypoints(initial), opts, keep_trace);
  out.waypoints = unpack_waypoints(first, out.search.x, world.bounds());
  out.value = -out.search.f;
  out.initial_value = objective(unpack_waypoints(first, pack_free_waypoints(initial), world.bounds()), field,
                                world, ctx.objective, ctx.camera, ctx.limits, ctx.measurement_phase);
  return out;
}

}  // namespace oaipp
