// Planning objectives: variance reduction, the layered UCB / sensor
// performance reward, and their composition with collision cost and flight
// time into the rate objective maximized by the planner.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "oaipp/fieldmap.hpp"
#include "oaipp/sensing.hpp"
#include "oaipp/trajectory.hpp"
#include "oaipp/world.hpp"

namespace oaipp {

enum class ObjectiveMode { NonAdaptive, Adaptive };

struct ObjectiveConfig {
  double k1 = 1.0;
  double k2 = 1000.0;
  double kappa = 2.0;
  ObjectiveMode mode = ObjectiveMode::Adaptive;
  PerformanceModel performance;
  SensorNoiseModel noise;
  double r_uav = 1.0;                      // m, diameter of the bounding sphere
  double collision_sample_spacing = 0.25;  // m
  int view_stride = 1;                     // 1: exact simulated fusion

  void validate() const {
    if (k1 < 0.0 || k2 < 0.0) throw ConfigError("k1 and k2 must be non-negative");
    if (kappa < 0.0) throw ConfigError("kappa must be non-negative");
    if (!(r_uav > 0.0)) throw ConfigError("r_uav must be > 0");
    if (!(collision_sample_spacing > 0.0)) throw ConfigError("collision sample spacing must be > 0");
    if (view_stride < 1) throw ConfigError("view stride must be >= 1");
  }
};

/// Cells seen from one measurement pose and the noise they are fused with.
struct View {
  Vec3 pose;
  std::vector<int> cells;
  double noise_variance = 1.0;
};

inline std::vector<View> plan_views(const GridSpec& grid, const Waypoints& poses,
                                    const EsdfWorld& world, const CameraModel& cam,
                                    const SensorNoiseModel& nm) {
  std::vector<View> views;
  views.reserve(poses.size());
  for (const auto& p : poses) {
    View v;
    v.pose = p;
    v.noise_variance = fusion_noise_variance(std::max(p.z(), 0.0), nm);
    if (world.bounds().contains(p)) v.cells = visible_footprint(world, p, cam, grid);
    views.push_back(std::move(v));
  }
  return views;
}

namespace detail {

// Measurement rows of one view. With stride s > 1 the visible cells are
// grouped into s x s blocks and each block becomes a single row at a
// representative cell, measured with noise r / (cells in block): the usual
// fully-correlated-block approximation of averaging s^2 detections.
struct ViewRows {
  std::vector<int> cells;
  std::vector<double> noise;
};

inline ViewRows view_rows(const GridSpec& grid, const View& view, int stride) {
  ViewRows out;
  if (stride <= 1) {
    out.cells = view.cells;
    out.noise.assign(view.cells.size(), view.noise_variance);
    return out;
  }
  struct Block {
    int best = -1;
    double best_d = 0.0;
    int count = 0;
  };
  std::unordered_map<long, Block> blocks;
  std::vector<long> order;
  for (int c : view.cells) {
    const int r = grid.row_of(c);
    const int q = grid.col_of(c);
    const long key = static_cast<long>(r / stride) * (grid.cols / stride + 1) + q / stride;
    const double mid = (stride - 1) / 2.0;
    const double d = std::abs(r % stride - mid) + std::abs(q % stride - mid);
    auto [it, fresh] = blocks.try_emplace(key);
    if (fresh) order.push_back(key);
    Block& b = it->second;
    ++b.count;
    if (b.best < 0 || d < b.best_d) {
      b.best = c;
      b.best_d = d;
    }
  }
  for (long key : order) {
    const Block& b = blocks.at(key);
    out.cells.push_back(b.best);
    out.noise.push_back(view.noise_variance / b.count);
  }
  return out;
}

// Stacked measurement rows with their noise and the Cholesky factor of the
// joint innovation covariance S = H P H^T + R. Fusing the stack at once is the
// same linear-Gaussian update as fusing its rows one view after another.
struct StackedRows {
  std::vector<int> rows;
  std::vector<double> noise;
  std::vector<std::size_t> view_start;  // first row of each view
  Eigen::LLT<Eigen::MatrixXd> llt;

  void factor(const Eigen::MatrixXd& p) {
    const auto m = size();
    if (m == 0) return;
    Eigen::MatrixXd s(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = j; i < m; ++i) s(i, j) = p(rows[i], rows[j]);
      s(j, j) += noise[j];
    }
    llt.compute(s);  // reads the lower triangle only
  }

  [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(rows.size()); }
};

// Rows of the first `count` views, in view order.
inline StackedRows stack_views(const FieldMap& field, const std::vector<View>& views, std::size_t count,
                               int stride) {
  StackedRows st;
  for (std::size_t k = 0; k < count; ++k) {
    st.view_start.push_back(st.rows.size());
    const ViewRows vr = view_rows(field.grid, views[k], stride);
    st.rows.insert(st.rows.end(), vr.cells.begin(), vr.cells.end());
    st.noise.insert(st.noise.end(), vr.noise.begin(), vr.noise.end());
  }
  st.view_start.push_back(st.rows.size());
  st.factor(field.covariance);
  return st;
}

// One row per distinct cell with the precisions of its repeats summed. Gives
// the same posterior covariance as the full stack, since independent
// measurements of one cell add in information form.
inline StackedRows merge_views(const FieldMap& field, const std::vector<View>& views, int stride) {
  std::unordered_map<int, std::size_t> row_of;
  std::vector<double> precision;
  StackedRows st;
  for (const auto& v : views) {
    const ViewRows vr = view_rows(field.grid, v, stride);
    for (std::size_t i = 0; i < vr.cells.size(); ++i) {
      auto [it, fresh] = row_of.try_emplace(vr.cells[i], st.rows.size());
      if (fresh) {
        st.rows.push_back(vr.cells[i]);
        precision.push_back(0.0);
      }
      precision[it->second] += 1.0 / vr.noise[i];
    }
  }
  st.noise.reserve(precision.size());
  for (double d : precision) st.noise.push_back(1.0 / d);
  st.view_start = {0, st.rows.size()};
  st.factor(field.covariance);
  return st;
}

}  // namespace detail

/// Tr(P-) - Tr(P+) after covariance-only fusion of the given views.
inline double trace_reduction(const FieldMap& field, const std::vector<View>& views, int stride = 1) {
  const detail::StackedRows stack = detail::merge_views(field, views, stride);
  if (stack.size() == 0) return 0.0;
  Eigen::MatrixXd m(stack.size(), field.size());
  for (Eigen::Index r = 0; r < stack.size(); ++r) m.row(r) = field.covariance.row(stack.rows[r]);
  stack.llt.matrixL().solveInPlace(m);
  return m.squaredNorm();
}

inline double info_gain_variance(const FieldMap& field, const Waypoints& poses,
                                 const EsdfWorld& world, const CameraModel& cam,
                                 const SensorNoiseModel& nm) {
  return trace_reduction(field, plan_views(field.grid, poses, world, cam, nm));
}

inline double ucb(double mean, double stddev, double kappa) { return mean + kappa * stddev; }

/// Acquisition view: summed UCB over the given cells with variances `var`.
inline double acquisition_sum(const FieldMap& field, const std::vector<int>& cells,
                              const std::vector<double>& var, double kappa) {
  double av = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    av += ucb(field.mean[cells[i]], std::sqrt(std::max(var[i], 0.0)), kappa);
  }
  return av;
}

inline double acquisition_view(const FieldMap& field, const Vec3& pose, const EsdfWorld& world,
                               const CameraModel& cam, double kappa) {
  const auto cells = visible_footprint(world, pose, cam, field.grid);
  std::vector<double> var(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) var[i] = field.covariance(cells[i], cells[i]);
  return acquisition_sum(field, cells, var, kappa);
}

/// Sum over views of AV x performance weight, where each view sees the
/// variances left after covariance-only fusion of the views before it.
inline double acquisition_gain(const FieldMap& field, const std::vector<View>& views,
                               const PerformanceModel& pm, double kappa, int stride = 1) {
  if (views.empty()) return 0.0;
  // Only the rows of views 1..K-1 ever condition a later view.
  const detail::StackedRows stack = detail::stack_views(field, views, views.size() - 1, stride);

  std::unordered_map<int, Eigen::Index> column_of;
  std::vector<int> columns;
  for (const auto& v : views) {
    for (int c : v.cells) {
      if (column_of.emplace(c, static_cast<Eigen::Index>(columns.size())).second) columns.push_back(c);
    }
  }
  Eigen::MatrixXd m;
  if (stack.size() > 0) {
    m.resize(stack.size(), static_cast<Eigen::Index>(columns.size()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index r = 0; r < stack.size(); ++r) m(r, j) = field.covariance(stack.rows[r], columns[j]);
    }
    stack.llt.matrixL().solveInPlace(m);
  }

  Eigen::VectorXd explained = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(columns.size()));
  double total = 0.0;
  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto& view = views[k];
    const double weight = performance_weight(view.pose.z(), pm);
    if (weight > 0.0 && !view.cells.empty()) {
      std::vector<double> var(view.cells.size());
      for (std::size_t i = 0; i < view.cells.size(); ++i) {
        const int c = view.cells[i];
        var[i] = field.covariance(c, c) - explained[column_of.at(c)];
      }
      total += weight * acquisition_sum(field, view.cells, var, kappa);
    }
    if (k + 1 < views.size()) {
      for (auto r = static_cast<Eigen::Index>(stack.view_start[k]);
           r < static_cast<Eigen::Index>(stack.view_start[k + 1]); ++r) {
        explained += m.row(r).transpose().cwiseAbs2();
      }
    }
  }
  return total;
}

inline double info_gain_adaptive(const FieldMap& field, const Waypoints& poses,
                                 const EsdfWorld& world, const CameraModel& cam,
                                 const PerformanceModel& pm, double kappa,
                                 const SensorNoiseModel& nm = {}) {
  return acquisition_gain(field, plan_views(field.grid, poses, world, cam, nm), pm, kappa);
}

/// O_info for the configured mode.
inline double information_value(const FieldMap& field, const Waypoints& poses,
                                const EsdfWorld& world, const CameraModel& cam,
                                const ObjectiveConfig& cfg) {
  const auto views = plan_views(field.grid, poses, world, cam, cfg.noise);
  return cfg.mode == ObjectiveMode::Adaptive
             ? acquisition_gain(field, views, cfg.performance, cfg.kappa, cfg.view_stride)
             : trace_reduction(field, views, cfg.view_stride);
}

/// Breakdown of one objective evaluation.
struct ObjectiveTerms {
  double info = 0.0;
  int collisions = 0;
  double flight_time = 0.0;
  double value = 0.0;
};

/// `phase` is the time from path start to its first measurement.
inline ObjectiveTerms evaluate_path(const Waypoints& waypoints, const FieldMap& field,
                                    const EsdfWorld& world, const ObjectiveConfig& cfg,
                                    const CameraModel& cam, const SpeedLimits& lim,
                                    double phase = 0.0) {
  const Trajectory traj = plan_polynomial(waypoints, lim);
  ObjectiveTerms terms;
  terms.info = information_value(field, measurement_poses(traj, cam.frequency, phase), world, cam, cfg);
  terms.collisions = path_collision_cost(world, traj, cfg.collision_sample_spacing, cfg.r_uav);
  terms.flight_time = flight_time(traj);
  terms.value = (cfg.k1 * terms.info - cfg.k2 * terms.collisions) / terms.flight_time;
  return terms;
}

/// (k1 O_info - k2 C_coll) / t_flight for the trajectory through `waypoints`.
inline double objective(const Waypoints& waypoints, const FieldMap& field, const EsdfWorld& world,
                        const ObjectiveConfig& cfg, const CameraModel& cam, const SpeedLimits& lim,
                        double phase = 0.0) {
  return evaluate_path(waypoints, field, world, cfg, cam, lim, phase).value;
}

/// Objective of flying from `from` to `candidate` and measuring there once.
inline ObjectiveTerms evaluate_viewpoint(const Vec3& from, const Vec3& candidate, const FieldMap& field,
                                         const EsdfWorld& world, const ObjectiveConfig& cfg,
                                         const CameraModel& cam, const SpeedLimits& lim) {
  const Trajectory traj = plan_polynomial({from, candidate}, lim);
  ObjectiveTerms terms;
  terms.info = information_value(field, {candidate}, world, cam, cfg);
  terms.collisions = path_collision_cost(world, traj, cfg.collision_sample_spacing, cfg.r_uav);
  terms.flight_time = flight_time(traj);
  terms.value = (cfg.k1 * terms.info - cfg.k2 * terms.collisions) / terms.flight_time;
  return terms;
}

inline std::string to_string(ObjectiveMode mode) {
  return mode == ObjectiveMode::Adaptive ? "adaptive" : "non-adaptive";
}

}  // namespace oaipp
