// Generators and reference implementations shared by the unit tests.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "oaipp/fieldmap.hpp"
#include "oaipp/world.hpp"

namespace oaipp::test {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Vec3 point(const Bounds& b) {
    return Vec3(uniform(b.min.x(), b.max.x()), uniform(b.min.y(), b.max.y()), uniform(b.min.z(), b.max.z()));
  }

  /// Random boxes of side 1..6 m fully inside `b`.
  std::vector<BoxObstacle> boxes(const Bounds& b, int count) {
    std::vector<BoxObstacle> out;
    for (int i = 0; i < count; ++i) {
      Vec3 size(uniform(1.0, 6.0), uniform(1.0, 6.0), uniform(1.0, 6.0));
      size = size.cwiseMin(b.extent() * 0.5);
      Vec3 lo;
      for (int a = 0; a < 3; ++a) lo[a] = uniform(b.min[a], b.max[a] - size[a]);
      out.push_back({lo, lo + size});
    }
    return out;
  }

  /// Distinct cell indices, `count` of them, from a field of `n` cells.
  std::vector<int> cells(int n, int count) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    std::shuffle(all.begin(), all.end(), rng_);
    all.resize(static_cast<std::size_t>(std::min(n, count)));
    return all;
  }

  Detection detection(int n, int max_cells) {
    Detection d;
    d.cell_indices = cells(n, integer(1, max_cells));
    for (std::size_t i = 0; i < d.cell_indices.size(); ++i) d.values.push_back(uniform(-0.5, 1.5));
    d.noise_variance = uniform(0.05, 2.0);
    return d;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Point-to-box distance by clamping; negative inside.
inline double box_distance(const BoxObstacle& box, const Vec3& p) {
  const Vec3 q = p.cwiseMax(box.min_corner).cwiseMin(box.max_corner);
  if (q != p) return (p - q).norm();
  double inner = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    inner = std::min({inner, p[a] - box.min_corner[a], box.max_corner[a] - p[a]});
  }
  return -inner;
}

inline double min_box_distance(const std::vector<BoxObstacle>& boxes, const Vec3& p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& b : boxes) d = std::min(d, box_distance(b, p));
  return d;
}

/// Parametric ray-box test: does the closed segment ab meet the closed box?
inline bool segment_meets_box(const Vec3& a, const Vec3& b, const BoxObstacle& box) {
  // Dense parametric walk; fine enough for the few-meter scenes in the tests.
  const int steps = 20000;
  for (int i = 0; i <= steps; ++i) {
    const Vec3 p = a + (b - a) * (static_cast<double>(i) / steps);
    if ((p.array() >= box.min_corner.array()).all() && (p.array() <= box.max_corner.array()).all()) return true;
  }
  return false;
}

/// Prior covariance K - K (K + sn^2 I)^-1 K by explicit inversion.
inline Eigen::MatrixXd dense_prior(const GridSpec& grid, const GpHyperparams& hp) {
  const int n = grid.size();
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = (grid.center(i) - grid.center(j)).norm();
      const double r = std::sqrt(3.0) * d / hp.lengthscale;
      k(i, j) = hp.signal_variance * (1.0 + r) * std::exp(-r);
    }
  }
  const Eigen::MatrixXd reg = k + hp.noise_variance * Eigen::MatrixXd::Identity(n, n);
  return k - k * reg.inverse() * k;
}

/// Batch posterior of a Gaussian prior after all detections at once.
struct BatchPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

inline BatchPosterior batch_posterior(const Eigen::VectorXd& m0, const Eigen::MatrixXd& p0,
                                      const std::vector<Detection>& dets) {
  int rows = 0;
  for (const auto& d : dets) rows += static_cast<int>(d.cell_indices.size());
  const auto n = m0.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(rows, n);
  Eigen::VectorXd y(rows);
  Eigen::VectorXd r(rows);
  int row = 0;
  for (const auto& d : dets) {
    for (std::size_t i = 0; i < d.cell_indices.size(); ++i, ++row) {
      h(row, d.cell_indices[i]) = 1.0;
      y[row] = d.values[i];
      r[row] = d.noise_variance;
    }
  }
  BatchPosterior out;
  if (rows == 0) {
    out.mean = m0;
    out.covariance = p0;
    return out;
  }
  const Eigen::MatrixXd s = h * p0 * h.transpose() + Eigen::MatrixXd(r.asDiagonal());
  const Eigen::MatrixXd gain = p0 * h.transpose() * s.fullPivLu().inverse();
  out.mean = m0 + gain * (y - h * m0);
  out.covariance = p0 - gain * h * p0;
  return out;
}

/// Small field built from the dense prior, so tests do not depend on init_field.
inline FieldMap small_field(int rows, int cols, double resolution = 1.0, double prior_mean = 0.1,
                            const GpHyperparams& hp = {}) {
  FieldMap f;
  f.grid.resolution = resolution;
  f.grid.rows = rows;
  f.grid.cols = cols;
  f.hyperparams = hp;
  f.mean = Eigen::VectorXd::Constant(rows * cols, prior_mean);
  f.covariance = dense_prior(f.grid, hp);
  return f;
}

}  // namespace oaipp::test
