// Simulated target-search missions: the replanning loop, the lawnmower and
// random-waypoint baselines, and multi-trial aggregation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "oaipp/planner.hpp"

namespace oaipp {

enum class PlannerKind { Adaptive, NonAdaptive, Lawnmower, Random };

inline std::string to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::Adaptive: return "oaipp-adaptive";
    case PlannerKind::NonAdaptive: return "oaipp-nonadaptive";
    case PlannerKind::Lawnmower: return "lawnmower";
    case PlannerKind::Random: return "random";
  }
  return "unknown";
}

inline const std::vector<std::string>& planner_names() {
  static const std::vector<std::string> names{"oaipp-adaptive", "oaipp-nonadaptive", "lawnmower", "random"};
  return names;
}

inline std::optional<PlannerKind> parse_planner(const std::string& name) {
  if (name == "oaipp-adaptive") return PlannerKind::Adaptive;
  if (name == "oaipp-nonadaptive") return PlannerKind::NonAdaptive;
  if (name == "lawnmower") return PlannerKind::Lawnmower;
  if (name == "random") return PlannerKind::Random;
  return std::nullopt;
}

struct WorldConfig {
  Bounds bounds{Vec3(0, 0, 0), Vec3(30, 30, 26)};
  double voxel_size = 0.5;
  bool include_bounds = true;
  std::vector<BoxObstacle> obstacles;
};

struct FieldConfig {
  double resolution = 0.75;
  Vec2 extent{30.0, 30.0};
  Vec2 origin{0.0, 0.0};
  double prior_mean = 0.1;
  GpHyperparams hyperparams;
  std::vector<Vec2> targets;  // ground positions of the target centers
  double target_size = 1.5;   // m, side of the square each target covers
  double threshold = 0.5;
};

struct SensingConfig {
  CameraModel camera;
  SensorNoiseModel noise;
  PerformanceModel performance;
  FalsePositiveInjector false_positive;
  bool altitude_recall = false;  // scale target contrast by detection_recall(h)
};

struct ObjectiveWeights {
  double k1 = 1.0;
  double k2 = 1000.0;
  double kappa = 2.0;
};

struct OptimizerConfig {
  int nbv_samples = 100;
  int population = 0;      // 0: default 4 + floor(3 ln n)
  double sigma0 = 0.0;     // 0: 10% of the smallest world extent
  int max_evaluations = 150;
  double f_tolerance = 1e-9;
  int view_stride = 2;  // >1 thins simulated measurements when planning
};

struct MissionConfig {
  double budget = 150.0;  // s
  PlannerKind planner = PlannerKind::Adaptive;
  int waypoints = 4;
  double r_uav = 1.0;
  double collision_sample_spacing = 0.25;
  Vec3 start{3.0, 27.0, 10.0};
  int retry_cap = 10;
  double bin_width = 5.0;
  double lawnmower_altitude = 10.0;
  double lawnmower_speed = 5.0;  // m/s; 0 flies one footprint length per sensor period
  WorldConfig world;
  FieldConfig field;
  SensingConfig sensing;
  ObjectiveWeights weights;
  OptimizerConfig optimizer;
  SpeedLimits limits;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(budget > 0.0)) throw ConfigError("mission budget must be > 0");
    if (waypoints < 2) throw ConfigError("mission.waypoints must be >= 2");
    if (!(r_uav > 0.0)) throw ConfigError("mission.r_uav must be > 0");
    if (!(collision_sample_spacing > 0.0)) throw ConfigError("collision sample spacing must be > 0");
    if (retry_cap < 1) throw ConfigError("mission.retry_cap must be >= 1");
    if (!(bin_width > 0.0)) throw ConfigError("mission.bin_width must be > 0");
    if (lawnmower_speed < 0.0) throw ConfigError("mission.lawnmower_speed must be >= 0");
    if (optimizer.nbv_samples < 1) throw ConfigError("optimizer.nbv_samples must be >= 1");
    if (optimizer.population != 0 && optimizer.population < 4) {
      throw ConfigError("optimizer.population must be >= 4");
    }
    if (optimizer.max_evaluations < 1) throw ConfigError("optimizer.max_evaluations must be >= 1");
    if (optimizer.view_stride < 1) throw ConfigError("optimizer.view_stride must be >= 1");
    if (!(limits.v_ref > 0.0 && limits.a_ref > 0.0)) throw ConfigError("speed limits must be positive");
    sensing.camera.validate();
    field.hyperparams.validate();
    if (!(sensing.noise.A >= 0.0 && sensing.noise.B > 0.0)) throw ConfigError("noise model needs A >= 0, B > 0");
    const auto& pm = sensing.performance;
    if (!(pm.h_opt > 0.0 && pm.h_opt < pm.h_sat && pm.sigma1 > 0.0)) {
      throw ConfigError("performance model needs 0 < h_opt < h_sat and sigma1 > 0");
    }
    if (weights.k1 < 0.0 || weights.k2 < 0.0 || weights.kappa < 0.0) {
      throw ConfigError("objective weights must be non-negative");
    }
    if (!world.bounds.contains(start)) throw ConfigError("mission.start lies outside the world bounds");
  }
};

struct MissionSample {
  double t = 0.0;
  double rse = 0.0;
  double trace = 0.0;
};

struct MissionLog {
  std::vector<MissionSample> samples;
  std::vector<double> pose_times;
  Waypoints executed_poses;             // measurement poses, in flight order
  std::vector<Waypoints> planned_paths;  // every flown path
  std::vector<double> path_start_times;
  int detections_count = 0;
  int collision_count = 0;
  int false_positives_injected = 0;
  int degenerate_viewpoints = 0;
  double flight_time = 0.0;
  bool aborted = false;
  std::string diagnostic;
  std::vector<std::string> warnings;
  Eigen::VectorXd final_mean;
  std::vector<CmaesGeneration> optimizer_trace;  // filled when tracing is requested
};

/// Cells covered by a target: the cell containing its center plus every cell
/// whose center falls in the half-open square of side `size` around it.
inline std::vector<int> target_cells(const GridSpec& grid, const Vec2& target, double size) {
  const int center = grid.locate(target.x(), target.y());
  if (center < 0) throw ConfigError("target lies outside the field");
  std::vector<int> cells{center};
  const double half = size / 2.0;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const int idx = grid.index(r, c);
      const Vec2 p = grid.center(idx);
      if (idx != center && p.x() >= target.x() - half && p.x() < target.x() + half &&
          p.y() >= target.y() - half && p.y() < target.y() + half) {
        cells.push_back(idx);
      }
    }
  }
  return cells;
}

/// Ground truth with the cells covered by each target set to 1.
inline GroundTruth make_truth(const GridSpec& grid, const std::vector<Vec2>& targets, double target_size = 0.0) {
  GroundTruth truth;
  truth.grid = grid;
  truth.occupancy.assign(static_cast<std::size_t>(grid.size()), 0);
  for (const auto& t : targets) {
    for (int idx : target_cells(grid, t, target_size)) truth.occupancy[static_cast<std::size_t>(idx)] = 1;
  }
  return truth;
}

/// Outcome of thresholding a map against the true target set. Occupied cells
/// are grouped into 8-connected blobs; a blob touching no target cell counts
/// as one false positive.
struct TargetRecovery {
  int targets = 0;
  int recovered = 0;
  int false_positives = 0;

  [[nodiscard]] bool exact() const { return recovered == targets && false_positives == 0; }
};

inline TargetRecovery target_recovery(const GridSpec& grid, const Eigen::VectorXd& mean,
                                      const std::vector<Vec2>& targets, double target_size,
                                      double threshold = 0.5) {
  const auto n = static_cast<std::size_t>(grid.size());
  std::vector<int> owner(n, -1);  // target index per covered cell
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (int c : target_cells(grid, targets[t], target_size)) owner[static_cast<std::size_t>(c)] = static_cast<int>(t);
  }
  TargetRecovery out;
  out.targets = static_cast<int>(targets.size());
  std::vector<bool> found(targets.size(), false);
  std::vector<bool> seen(n, false);
  for (int start = 0; start < grid.size(); ++start) {
    if (seen[static_cast<std::size_t>(start)] || mean[start] < threshold) continue;
    bool on_target = false;
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = true;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      if (owner[static_cast<std::size_t>(c)] >= 0) {
        on_target = true;
        found[static_cast<std::size_t>(owner[static_cast<std::size_t>(c)])] = true;
      }
      const int r0 = grid.row_of(c);
      const int c0 = grid.col_of(c);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = r0 + dr;
          const int q = c0 + dc;
          if (r < 0 || q < 0 || r >= grid.rows || q >= grid.cols) continue;
          const int nb = grid.index(r, q);
          if (seen[static_cast<std::size_t>(nb)] || mean[nb] < threshold) continue;
          seen[static_cast<std::size_t>(nb)] = true;
          stack.push_back(nb);
        }
      }
    }
    if (!on_target) ++out.false_positives;
  }
  out.recovered = static_cast<int>(std::count(found.begin(), found.end(), true));
  return out;
}

inline GridSpec field_grid(const MissionConfig& cfg) {
  return make_grid(cfg.field.resolution, cfg.field.extent, cfg.field.origin);
}

inline EsdfWorld make_world(const MissionConfig& cfg) {
  return build_esdf(cfg.world.obstacles, cfg.world.bounds, cfg.world.voxel_size, cfg.world.include_bounds);
}

inline FieldMap make_prior(const MissionConfig& cfg) {
  return init_field(field_grid(cfg), cfg.field.prior_mean, cfg.field.hyperparams);
}

inline ObjectiveConfig objective_config(const MissionConfig& cfg) {
  ObjectiveConfig oc;
  oc.k1 = cfg.weights.k1;
  oc.k2 = cfg.weights.k2;
  oc.kappa = cfg.weights.kappa;
  oc.mode = cfg.planner == PlannerKind::NonAdaptive ? ObjectiveMode::NonAdaptive : ObjectiveMode::Adaptive;
  oc.performance = cfg.sensing.performance;
  oc.noise = cfg.sensing.noise;
  oc.r_uav = cfg.r_uav;
  oc.collision_sample_spacing = cfg.collision_sample_spacing;
  oc.view_stride = cfg.optimizer.view_stride;
  return oc;
}

inline PlanningContext planning_context(const MissionConfig& cfg, const EsdfWorld& world) {
  PlanningContext ctx;
  ctx.world = &world;
  ctx.camera = cfg.sensing.camera;
  ctx.limits = cfg.limits;
  ctx.objective = objective_config(cfg);
  ctx.nbv_samples = cfg.optimizer.nbv_samples;
  return ctx;
}

inline bool segment_is_clear(const EsdfWorld& world, const Vec3& a, const Vec3& b, double spacing, double r_uav) {
  return path_collision_cost(world, Trajectory({a, b}, {QuinticSegment{a, b, 1.0}}), spacing, r_uav) == 0;
}

/// Collision-free planar detour from a to b at the altitude of a: Dijkstra
/// over an 8-connected voxel grid of cells with clearance above r_uav/2 + 0.25 m,
/// then shortcut by line of sight. Returns only the inserted intermediate
/// points, or nothing if the direct hop is clear or no detour exists.
inline Waypoints detour_waypoints(const EsdfWorld& world, const Vec3& a, const Vec3& b, double spacing,
                                  double r_uav) {
  if (segment_is_clear(world, a, b, spacing, r_uav)) return {};
  const Bounds& box = world.bounds();
  const double h = world.voxel_size();
  const int nx = std::max(1, static_cast<int>(std::floor(box.extent().x() / h)));
  const int ny = std::max(1, static_cast<int>(std::floor(box.extent().y() / h)));
  const double z = a.z();
  const auto centre = [&](int c) {
    return Vec3(box.min.x() + (c % nx + 0.5) * h, box.min.y() + (c / nx + 0.5) * h, z);
  };
  const auto cell_of = [&](const Vec3& p) {
    const int i = std::clamp(static_cast<int>(std::floor((p.x() - box.min.x()) / h)), 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y() - box.min.y()) / h)), 0, ny - 1);
    return j * nx + i;
  };
  const int start = cell_of(a);
  const int goal = cell_of(b);
  const double margin = r_uav / 2.0 + 0.25;
  std::vector<char> free(static_cast<std::size_t>(nx * ny));
  for (int c = 0; c < nx * ny; ++c) free[c] = c == start || c == goal || world.query(centre(c)) > margin;

  std::vector<double> dist(free.size(), std::numeric_limits<double>::infinity());
  std::vector<int> prev(free.size(), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[start] = 0.0;
  open.emplace(0.0, start);
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (d > dist[u]) continue;
    if (u == goal) break;
    const int ui = u % nx, uj = u / nx;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int vi = ui + di, vj = uj + dj;
        if ((di == 0 && dj == 0) || vi < 0 || vj < 0 || vi >= nx || vj >= ny) continue;
        const int v = vj * nx + vi;
        // Diagonal moves must not cut a blocked corner.
        if (!free[v] || (di != 0 && dj != 0 && (!free[uj * nx + vi] || !free[vj * nx + ui]))) continue;
        const double nd = d + h * std::hypot(di, dj);
        if (nd < dist[v]) {
          dist[v] = nd;
          prev[v] = u;
          open.emplace(nd, v);
        }
      }
    }
  }
  if (!std::isfinite(dist[goal])) return {};

  Waypoints chain{b};
  for (int c = prev[goal]; c != -1 && c != start; c = prev[c]) chain.push_back(centre(c));
  chain.push_back(a);
  std::reverse(chain.begin(), chain.end());
  Waypoints via;
  std::size_t anchor = 0;
  while (anchor + 1 < chain.size()) {
    std::size_t next = chain.size() - 1;
    while (next > anchor && !segment_is_clear(world, chain[anchor], chain[next], spacing, r_uav)) --next;
    if (next == anchor) return {};
    if (next + 1 < chain.size()) via.push_back(chain[next]);
    anchor = next;
  }
  return via;
}

struct LawnmowerPlan {
  Trajectory trajectory;
  double spacing = 0.0;
  int tracks = 0;
  int widen_factor = 1;
  bool widened = false;  // the nominal pattern did not fit the time budget
  double speed = 0.0;    // cruise speed used for the sweep
};

/// Boustrophedon sweep of the field at the configured altitude starting from
/// `current`, with track spacing equal to the cross-track footprint width,
/// widened by the smallest integer factor that fits `time_budget`. The sweep
/// speed is `lawnmower_speed` (capped at v_ref); 0 selects the speed that
/// advances one along-track footprint length per sensor period. Sweep points
/// that are occupied or unreachable by a planar detour are skipped.
inline LawnmowerPlan lawnmower_plan(const MissionConfig& cfg, const EsdfWorld& world, const Vec3& current,
                                    double time_budget) {
  const double h = cfg.lawnmower_altitude;
  const Vec2 half = footprint_half_extents(h, cfg.sensing.camera);
  const double width = cfg.field.extent.x();
  const double height = cfg.field.extent.y();
  const double nominal = 2.0 * half.y();
  const double inset_x = std::min(half.x(), width / 2.0);
  const double x_lo = cfg.field.origin.x() + inset_x;
  const double x_hi = cfg.field.origin.x() + width - inset_x;
  SpeedLimits lim = cfg.limits;
  lim.v_ref = std::min(lim.v_ref, cfg.lawnmower_speed > 0.0 ? cfg.lawnmower_speed
                                                             : 2.0 * half.x() * cfg.sensing.camera.frequency);

  LawnmowerPlan best;
  for (int factor = 1;; ++factor) {
    const double spacing = nominal * factor;
    const int tracks = std::max(1, static_cast<int>(std::ceil(height / spacing - 1e-9)));
    // Four mirror images of the pattern; start from the corner nearest `current`.
    Waypoints pattern;
    double best_start = std::numeric_limits<double>::infinity();
    for (int variant = 0; variant < 4; ++variant) {
      Waypoints sweep;
      for (int k = 0; k < tracks; ++k) {
        const int row = (variant & 2) ? tracks - 1 - k : k;
        const double y = cfg.field.origin.y() + (row + 0.5) * height / tracks;
        const bool forward = ((k % 2) == 0) != static_cast<bool>(variant & 1);
        sweep.emplace_back(forward ? x_lo : x_hi, y, h);
        sweep.emplace_back(forward ? x_hi : x_lo, y, h);
      }
      const double d = (sweep.front() - current).norm();
      if (d < best_start) {
        best_start = d;
        pattern = std::move(sweep);
      }
    }
    // Occupied track ends slide inward until free; a fully blocked track is dropped.
    Waypoints ends;
    for (std::size_t k = 0; k + 1 < pattern.size(); k += 2) {
      Vec3 p0 = pattern[k], p1 = pattern[k + 1];
      if ((p1 - p0).norm() < 1e-9) {
        if (hard_collision_cost(world, p0, cfg.r_uav) == 0) ends.push_back(p0);
        continue;
      }
      const Vec3 dir = (p1 - p0).normalized();
      const double step = cfg.collision_sample_spacing;
      while ((p1 - p0).dot(dir) > 0.0 && hard_collision_cost(world, p0, cfg.r_uav) != 0) p0 += step * dir;
      while ((p1 - p0).dot(dir) > 0.0 && hard_collision_cost(world, p1, cfg.r_uav) != 0) p1 -= step * dir;
      if ((p1 - p0).dot(dir) <= 0.0) continue;
      ends.push_back(p0);
      ends.push_back(p1);
    }
    Waypoints path{current};
    for (const auto& p : ends) {
      const auto via = detour_waypoints(world, path.back(), p, cfg.collision_sample_spacing, cfg.r_uav);
      if (via.empty() && !segment_is_clear(world, path.back(), p, cfg.collision_sample_spacing, cfg.r_uav)) continue;
      path.insert(path.end(), via.begin(), via.end());
      path.push_back(p);
    }
    if (path.size() < 2) path.push_back(current);
    LawnmowerPlan plan{plan_polynomial(path, lim), spacing, tracks, factor, factor > 1, lim.v_ref};
    best = plan;
    if (flight_time(plan.trajectory) <= time_budget || tracks == 1) break;
  }
  return best;
}

/// Two-waypoint hop to a uniformly drawn, admissible destination above the
/// field (altitude up to h_sat). Hovers in place after 100 rejected draws.
inline Trajectory random_waypoint_plan(const Vec3& current, const MissionConfig& cfg, const EsdfWorld& world,
                                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(cfg.field.origin.x(), cfg.field.origin.x() + cfg.field.extent.x());
  std::uniform_real_distribution<double> uy(cfg.field.origin.y(), cfg.field.origin.y() + cfg.field.extent.y());
  std::uniform_real_distribution<double> uz(0.0, cfg.sensing.performance.h_sat);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double x = ux(rng);
    const double y = uy(rng);
    const double z = uz(rng);
    const Vec3 dest(x, y, z);
    if (!world.bounds().contains(dest)) continue;
    if (hard_collision_cost(world, dest, cfg.r_uav) != 0) continue;
    if (!line_of_sight(world, current, dest)) continue;
    return plan_polynomial({current, dest}, cfg.limits);
  }
  return plan_polynomial({current, current}, cfg.limits);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double path_length(const Waypoints& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += (path[i] - path[i - 1]).norm();
  return len;
}

}  // namespace detail

struct MissionOptions {
  const FieldMap* prior = nullptr;  // reuse a precomputed prior for this grid
  bool trace_optimizer = false;
};

/// Plans, checks, flies and maps until the flight budget cannot fit another
/// path. Deterministic in cfg.seed.
inline MissionLog run_mission(const MissionConfig& cfg, const MissionOptions& options = {}) {
  cfg.validate();
  const EsdfWorld world = make_world(cfg);
  FieldMap field = options.prior ? *options.prior : make_prior(cfg);
  if (!(field.grid == field_grid(cfg))) throw ConfigError("precomputed prior does not match the field grid");
  const GroundTruth truth = make_truth(field.grid, cfg.field.targets, cfg.field.target_size);
  PlanningContext ctx = planning_context(cfg, world);
  // The camera fires on a fixed clock, k / f, that keeps running across replans.
  const double period = 1.0 / cfg.sensing.camera.frequency;
  long next_tick = 1;

  std::mt19937_64 planner_rng(detail::splitmix64(cfg.seed));
  std::mt19937_64 fp_rng(detail::splitmix64(cfg.seed ^ 0x5eed5eedULL));
  std::uint64_t detection_counter = 0;

  bool inject_pending = false;
  if (cfg.sensing.false_positive.enabled) {
    std::bernoulli_distribution coin(std::clamp(cfg.sensing.false_positive.probability, 0.0, 1.0));
    inject_pending = coin(fp_rng);
  }

  MissionLog log;
  const auto measure = [&](const Vec3& pose, double t) {
    const double recall =
        cfg.sensing.altitude_recall ? detection_recall(pose.z(), cfg.sensing.performance) : 1.0;
    Detection det = simulate_detection(truth, pose, world, cfg.sensing.camera, cfg.sensing.noise,
                                       detail::splitmix64(cfg.seed * 0x100000001b3ULL + detection_counter++), recall);
    if (inject_pending && inject_false_positive(det, truth, cfg.sensing.false_positive, fp_rng) >= 0) {
      inject_pending = false;
      ++log.false_positives_injected;
    }
    fuse_measurement(field, det);
    ++log.detections_count;
    log.executed_poses.push_back(pose);
    log.pose_times.push_back(t);
    log.samples.push_back({t, rse(field, truth), covariance_trace(field)});
  };

  CmaesOptions cmaes;
  cmaes.population = cfg.optimizer.population;
  cmaes.sigma0 = cfg.optimizer.sigma0 > 0.0 ? cfg.optimizer.sigma0 : default_sigma0(world.bounds());
  cmaes.max_evaluations = cfg.optimizer.max_evaluations;
  cmaes.f_tolerance = cfg.optimizer.f_tolerance;

  Vec3 pose = cfg.start;
  double elapsed = 0.0;
  measure(pose, 0.0);

  while (true) {
    ctx.measurement_phase = static_cast<double>(next_tick) * period - elapsed;
    std::optional<Trajectory> accepted;
    for (int attempt = 0; attempt < cfg.retry_cap && !accepted; ++attempt) {
      Trajectory candidate;
      switch (cfg.planner) {
        case PlannerKind::Adaptive:
        case PlannerKind::NonAdaptive: {
          int degenerate = 0;
          const Waypoints init = coarse_greedy_search(field, ctx, pose, cfg.waypoints, planner_rng, &degenerate);
          log.degenerate_viewpoints += degenerate;
          cmaes.seed = planner_rng();
          const RefinedPath refined = refine_path(init, field, ctx, cmaes, options.trace_optimizer);
          if (options.trace_optimizer) {
            log.optimizer_trace.insert(log.optimizer_trace.end(), refined.search.trace.begin(),
                                       refined.search.trace.end());
          }
          candidate = plan_polynomial(refined.waypoints, cfg.limits);
          break;
        }
        case PlannerKind::Lawnmower: {
          const LawnmowerPlan plan = lawnmower_plan(cfg, world, pose, cfg.budget - elapsed);
          if (plan.widened) {
            log.warnings.push_back("lawnmower spacing widened x" + std::to_string(plan.widen_factor) +
                                   " to fit the remaining budget at t=" + std::to_string(elapsed) + " s");
          }
          candidate = plan.trajectory;
          break;
        }
        case PlannerKind::Random:
          candidate = random_waypoint_plan(pose, cfg, world, planner_rng);
          break;
      }
      if (path_collision_cost(world, candidate, cfg.collision_sample_spacing, cfg.r_uav) == 0) {
        accepted = std::move(candidate);
      }
    }
    if (!accepted) {
      log.aborted = true;
      log.diagnostic = "no collision-free path found within " + std::to_string(cfg.retry_cap) +
                       " attempts at t=" + std::to_string(elapsed) + " s";
      break;
    }
    const Trajectory& traj = *accepted;
    const double duration = flight_time(traj);
    // Hover: either the budget cannot fit the path or the planner produced no motion.
    if (elapsed + duration > cfg.budget + 1e-9) break;
    if (detail::path_length(traj.waypoints()) < 1e-9) break;

    log.planned_paths.push_back(traj.waypoints());
    log.path_start_times.push_back(elapsed);
    log.collision_count += path_collision_cost(world, traj, cfg.collision_sample_spacing, cfg.r_uav);
    for (double t : measurement_times(traj, cfg.sensing.camera.frequency, ctx.measurement_phase)) {
      measure(traj.position(t), elapsed + t);
      ++next_tick;
    }
    elapsed += duration;
    pose = traj.waypoints().back();
  }
  log.flight_time = elapsed;
  log.final_mean = field.mean;
  return log;
}

struct TrialSummary {
  std::vector<double> times;
  std::vector<double> rse_mean, rse_std, trace_mean, trace_std;
  std::vector<MissionLog> logs;                // accepted missions, in seed order
  std::vector<std::uint64_t> seeds;            // seeds of the accepted missions
  std::vector<std::uint64_t> aborted_seeds;
  std::vector<std::string> abort_diagnostics;
};

/// Last-observation-carried-forward value of a log at time t.
inline MissionSample sample_at(const MissionLog& log, double t) {
  MissionSample out = log.samples.front();
  for (const auto& s : log.samples) {
    if (s.t <= t + 1e-9) out = s;
    else break;
  }
  return out;
}

/// Aggregates logs on the grid 0, w, 2w, ... <= budget (population std).
inline void aggregate(TrialSummary& summary, double budget, double bin_width) {
  summary.times.clear();
  const int bins = static_cast<int>(std::floor(budget / bin_width + 1e-9));
  for (int b = 0; b <= bins; ++b) summary.times.push_back(b * bin_width);
  const std::size_t nb = summary.times.size();
  summary.rse_mean.assign(nb, 0.0);
  summary.rse_std.assign(nb, 0.0);
  summary.trace_mean.assign(nb, 0.0);
  summary.trace_std.assign(nb, 0.0);
  if (summary.logs.empty()) return;
  const double count = static_cast<double>(summary.logs.size());
  for (std::size_t b = 0; b < nb; ++b) {
    double rs = 0.0, rs2 = 0.0, tr = 0.0, tr2 = 0.0;
    for (const auto& log : summary.logs) {
      const MissionSample s = sample_at(log, summary.times[b]);
      rs += s.rse;
      tr += s.trace;
    }
    summary.rse_mean[b] = rs / count;
    summary.trace_mean[b] = tr / count;
    for (const auto& log : summary.logs) {
      const MissionSample s = sample_at(log, summary.times[b]);
      rs2 += (s.rse - summary.rse_mean[b]) * (s.rse - summary.rse_mean[b]);
      tr2 += (s.trace - summary.trace_mean[b]) * (s.trace - summary.trace_mean[b]);
    }
    summary.rse_std[b] = std::sqrt(rs2 / count);
    summary.trace_std[b] = std::sqrt(tr2 / count);
  }
}

/// Runs missions with seeds cfg.seed + 0 .. n_trials - 1 and aggregates them.
/// `seed_of` overrides the per-trial seed when given.
inline TrialSummary run_trials(const MissionConfig& cfg, int n_trials,
                               const std::function<std::uint64_t(int)>& seed_of = {}) {
  if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
  cfg.validate();
  const FieldMap prior = make_prior(cfg);
  TrialSummary summary;
  for (int i = 0; i < n_trials; ++i) {
    MissionConfig trial = cfg;
    trial.seed = seed_of ? seed_of(i) : cfg.seed + static_cast<std::uint64_t>(i);
    MissionOptions opts;
    opts.prior = &prior;
    MissionLog log = run_mission(trial, opts);
    if (log.aborted) {
      summary.aborted_seeds.push_back(trial.seed);
      summary.abort_diagnostics.push_back(log.diagnostic);
      continue;
    }
    summary.seeds.push_back(trial.seed);
    summary.logs.push_back(std::move(log));
  }
  aggregate(summary, cfg.budget, cfg.bin_width);
  return summary;
}

}  // namespace oaipp
