// Gaussian-process belief over a uniform 2D ground grid, with a Matern 3/2
// prior and recursive Kalman-filter fusion of footprint measurements.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <vector>

#include "oaipp/types.hpp"

namespace oaipp {

struct GpHyperparams {
  double lengthscale = 3.67;
  double signal_variance = 1.82;
  double noise_variance = 1.42;

  void validate() const {
    if (!(lengthscale > 0.0 && signal_variance > 0.0 && noise_variance > 0.0)) {
      throw ConfigError("GP hyperparameters must be strictly positive");
    }
  }
};

/// Row-major grid of square cells anchored at `origin` (the lower-left
/// corner). Cell index = row * cols + col, with rows running along y.
struct GridSpec {
  double resolution = 0.75;
  int rows = 0;
  int cols = 0;
  Vec2 origin = Vec2::Zero();

  [[nodiscard]] int size() const { return rows * cols; }
  [[nodiscard]] int index(int row, int col) const { return row * cols + col; }
  [[nodiscard]] int row_of(int idx) const { return idx / cols; }
  [[nodiscard]] int col_of(int idx) const { return idx % cols; }

  [[nodiscard]] Vec2 center(int idx) const {
    return origin + resolution * Vec2(col_of(idx) + 0.5, row_of(idx) + 0.5);
  }

  /// Cell containing the ground point (x, y), or -1 outside the grid.
  [[nodiscard]] int locate(double x, double y) const {
    const int col = static_cast<int>(std::floor((x - origin.x()) / resolution));
    const int row = static_cast<int>(std::floor((y - origin.y()) / resolution));
    if (row < 0 || row >= rows || col < 0 || col >= cols) return -1;
    return index(row, col);
  }

  [[nodiscard]] Vec2 extent() const { return resolution * Vec2(cols, rows); }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.resolution == b.resolution && a.rows == b.rows && a.cols == b.cols &&
           a.origin == b.origin;
  }
};

inline GridSpec make_grid(double resolution, const Vec2& extent, const Vec2& origin = Vec2::Zero()) {
  if (!(resolution > 0.0)) throw ConfigError("field resolution must be > 0");
  GridSpec grid;
  grid.resolution = resolution;
  grid.cols = static_cast<int>(std::floor(extent.x() / resolution + 1e-9));
  grid.rows = static_cast<int>(std::floor(extent.y() / resolution + 1e-9));
  grid.origin = origin;
  if (grid.rows < 1 || grid.cols < 1) {
    throw ConfigError("field resolution must leave at least one cell per axis");
  }
  return grid;
}

/// One simulated camera measurement: observed values for the visible cells.
struct Detection {
  Vec3 pose = Vec3::Zero();
  std::vector<int> cell_indices;
  std::vector<double> values;
  double noise_variance = 1.0;
};

struct FieldMap {
  GridSpec grid;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  GpHyperparams hyperparams;

  [[nodiscard]] int size() const { return static_cast<int>(mean.size()); }
};

struct GroundTruth {
  GridSpec grid;
  std::vector<std::uint8_t> occupancy;  // 0 or 1 per cell

  [[nodiscard]] double at(int idx) const { return occupancy[static_cast<std::size_t>(idx)]; }
};

/// Isotropic Matern 3/2 covariance at distance d.
inline double matern32(double d, const GpHyperparams& hp) {
  const double r = std::sqrt(3.0) * d / hp.lengthscale;
  return hp.signal_variance * (1.0 + r) * std::exp(-r);
}

inline Eigen::MatrixXd kernel_matrix(const GridSpec& grid, const GpHyperparams& hp) {
  const int n = grid.size();
  Eigen::MatrixXd k(n, n);
  for (int j = 0; j < n; ++j) {
    const Vec2 cj = grid.center(j);
    for (int i = j; i < n; ++i) {
      k(i, j) = matern32((grid.center(i) - cj).norm(), hp);
      k(j, i) = k(i, j);
    }
  }
  return k;
}

/// Prior belief: uniform mean and P = K - K (K + sn^2 I)^-1 K with the
/// prediction points equal to the training points.
inline FieldMap init_field(const GridSpec& grid, double prior_mean, const GpHyperparams& hp) {
  hp.validate();
  const int n = grid.size();
  const Eigen::MatrixXd k = kernel_matrix(grid, hp);
  Eigen::MatrixXd regularized = k;
  regularized.diagonal().array() += hp.noise_variance;
  const Eigen::LLT<Eigen::MatrixXd> llt(regularized);
  // K (K + sn^2 I)^-1 K = W^T W with W = L^-1 K.
  Eigen::MatrixXd w = llt.matrixL().solve(k);
  Eigen::MatrixXd p = k;
  p.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose(), -1.0);
  p.triangularView<Eigen::StrictlyUpper>() = p.transpose();

  FieldMap field;
  field.grid = grid;
  field.mean = Eigen::VectorXd::Constant(n, prior_mean);
  field.covariance = std::move(p);
  field.hyperparams = hp;
  return field;
}

inline FieldMap init_field(double resolution, const Vec2& extent, double prior_mean,
                           const GpHyperparams& hp) {
  return init_field(make_grid(resolution, extent), prior_mean, hp);
}

namespace detail {

inline void check_cells(const FieldMap& field, std::span<const int> cells) {
  for (int c : cells) {
    if (c < 0 || c >= field.size()) {
      std::ostringstream msg;
      msg << "cell index " << c << " outside field of " << field.size() << " cells";
      throw std::out_of_range(msg.str());
    }
  }
}

// Shared KF machinery. Returns W = L^-1 H P where L L^T = H P H^T + R and
// applies P <- P - W^T W. The factor is handed back for the mean update.
inline Eigen::MatrixXd covariance_update(FieldMap& field, std::span<const int> cells,
                                         double noise_variance, Eigen::LLT<Eigen::MatrixXd>& llt) {
  const int m = static_cast<int>(cells.size());
  const int n = field.size();
  Eigen::MatrixXd hp(m, n);
  for (int r = 0; r < m; ++r) hp.row(r) = field.covariance.row(cells[static_cast<std::size_t>(r)]);
  Eigen::MatrixXd s(m, m);
  for (int c = 0; c < m; ++c) s.col(c) = hp.col(cells[static_cast<std::size_t>(c)]);
  s.diagonal().array() += noise_variance;
  llt.compute(s);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("innovation covariance is not positive definite");
  }
  llt.matrixL().solveInPlace(hp);
  field.covariance.selfadjointView<Eigen::Lower>().rankUpdate(hp.transpose(), -1.0);
  field.covariance.triangularView<Eigen::StrictlyUpper>() = field.covariance.transpose();
  return hp;
}

}  // namespace detail

/// Kalman update with a linear observation picking `det.cell_indices` and
/// noise det.noise_variance * I. An empty detection leaves the field as is.
inline void fuse_measurement(FieldMap& field, const Detection& det) {
  if (det.cell_indices.empty()) return;
  if (det.values.size() != det.cell_indices.size()) {
    throw std::invalid_argument("detection values and cells differ in length");
  }
  if (!(det.noise_variance > 0.0)) throw std::invalid_argument("noise variance must be > 0");
  detail::check_cells(field, det.cell_indices);
  const int m = static_cast<int>(det.cell_indices.size());
  Eigen::VectorXd innovation(m);
  for (int r = 0; r < m; ++r) {
    innovation[r] = det.values[static_cast<std::size_t>(r)] -
                    field.mean[det.cell_indices[static_cast<std::size_t>(r)]];
  }
  Eigen::LLT<Eigen::MatrixXd> llt;
  const Eigen::MatrixXd w = detail::covariance_update(field, det.cell_indices, det.noise_variance, llt);
  // mean += P H^T S^-1 nu = W^T L^-1 nu
  llt.matrixL().solveInPlace(innovation);
  field.mean.noalias() += w.transpose() * innovation;
}

/// Covariance part of the Kalman update only; used for simulated (planning)
/// measurements whose values are unknown.
inline void fuse_covariance_only(FieldMap& field, std::span<const int> cells, double noise_variance) {
  if (cells.empty()) return;
  if (!(noise_variance > 0.0)) throw std::invalid_argument("noise variance must be > 0");
  detail::check_cells(field, cells);
  Eigen::LLT<Eigen::MatrixXd> llt;
  detail::covariance_update(field, cells, noise_variance, llt);
}

inline double covariance_trace(const FieldMap& field) { return field.covariance.trace(); }

/// Root of the summed squared difference between belief mean and truth.
inline double rse(const FieldMap& field, const GroundTruth& truth) {
  if (!(truth.grid == field.grid) ||
      truth.occupancy.size() != static_cast<std::size_t>(field.size())) {
    throw std::invalid_argument("ground truth and field dimensions differ");
  }
  double sum = 0.0;
  for (int i = 0; i < field.size(); ++i) {
    const double e = field.mean[i] - truth.at(i);
    sum += e * e;
  }
  return std::sqrt(sum);
}

/// Cells whose mean reaches `threshold`.
inline std::vector<int> classify_occupied(const FieldMap& field, double threshold = 0.5) {
  std::vector<int> cells;
  for (int i = 0; i < field.size(); ++i) {
    if (field.mean[i] >= threshold) cells.push_back(i);
  }
  return cells;
}

}  // namespace oaipp
