// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and
// rank-one plus rank-mu covariance updates.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "oaipp/types.hpp"

namespace oaipp {

struct CmaesOptions {
  int population = 0;  // 0 selects 4 + floor(3 ln n)
  double sigma0 = 1.0;
  int max_evaluations = 10000;
  double f_tolerance = 1e-12;
  std::uint64_t seed = 1;
};

struct CmaesGeneration {
  int generation = 0;
  int evaluations = 0;
  double best_f = 0.0;
  double sigma = 0.0;
};

struct CmaesResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  int generations = 0;
  double min_eigenvalue = 0.0;  // of C at termination
  std::vector<CmaesGeneration> trace;
};

inline int default_population(int n) {
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n))));
}

/// Evolution state. Parameters follow the standard default settings.
class Cmaes {
 public:
  Cmaes(const Eigen::VectorXd& x0, const CmaesOptions& opts)
      : n_(static_cast<int>(x0.size())),
        lambda_(opts.population > 0 ? opts.population : default_population(n_)),
        mean_(x0),
        sigma_(opts.sigma0),
        rng_(opts.seed) {
    if (n_ < 1) throw ConfigError("CMA-ES needs at least one dimension");
    if (lambda_ < 4) throw ConfigError("CMA-ES population must be >= 4");
    if (!(sigma_ > 0.0)) throw ConfigError("CMA-ES initial step must be > 0");
    const double n = n_;
    mu_ = lambda_ / 2;
    weights_.resize(mu_);
    for (int i = 0; i < mu_; ++i) {
      weights_[i] = std::log((lambda_ + 1.0) / 2.0) - std::log(i + 1.0);
    }
    weights_ /= weights_.sum();
    mu_eff_ = 1.0 / weights_.squaredNorm();

    c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
    d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) + c_sigma_;
    c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
    c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
    c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((n + 2.0) * (n + 2.0) + mu_eff_));
    chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

    p_sigma_ = Eigen::VectorXd::Zero(n_);
    p_c_ = Eigen::VectorXd::Zero(n_);
    c_ = Eigen::MatrixXd::Identity(n_, n_);
    b_ = Eigen::MatrixXd::Identity(n_, n_);
    d_ = Eigen::VectorXd::Ones(n_);
  }

  [[nodiscard]] int dimension() const { return n_; }
  [[nodiscard]] int population() const { return lambda_; }
  [[nodiscard]] double sigma() const { return sigma_; }
  [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
  [[nodiscard]] const Eigen::MatrixXd& covariance() const { return c_; }
  [[nodiscard]] int generation() const { return generation_; }
  [[nodiscard]] double min_eigenvalue() const { return d_.minCoeff() * d_.minCoeff(); }
  [[nodiscard]] double condition() const {
    return (d_.maxCoeff() * d_.maxCoeff()) / (d_.minCoeff() * d_.minCoeff());
  }
  [[nodiscard]] double max_axis_step() const { return sigma_ * c_.diagonal().cwiseSqrt().maxCoeff(); }

  /// Draws lambda candidates x_k = m + sigma B D z_k.
  std::vector<Eigen::VectorXd> ask() {
    std::normal_distribution<double> normal(0.0, 1.0);
    z_.assign(static_cast<std::size_t>(lambda_), Eigen::VectorXd(n_));
    std::vector<Eigen::VectorXd> xs;
    xs.reserve(static_cast<std::size_t>(lambda_));
    for (auto& z : z_) {
      for (int i = 0; i < n_; ++i) z[i] = normal(rng_);
      xs.push_back(mean_ + sigma_ * (b_ * d_.cwiseProduct(z)));
    }
    return xs;
  }

  /// Updates the distribution from the fitness of the last ask() batch.
  /// Non-finite values rank last.
  void tell(const std::vector<double>& fitness) {
    std::vector<int> order(static_cast<std::size_t>(lambda_));
    std::iota(order.begin(), order.end(), 0);
    const auto key = [&](int i) {
      const double f = fitness[static_cast<std::size_t>(i)];
      return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });

    const double n = n_;
    Eigen::MatrixXd y(n_, mu_);  // selected steps in x-space, divided by sigma
    Eigen::VectorXd z_mean = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < mu_; ++i) {
      const auto& z = z_[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      y.col(i) = b_ * d_.cwiseProduct(z);
      z_mean += weights_[i] * z;
    }
    const Eigen::VectorXd y_mean = y * weights_;
    mean_ += sigma_ * y_mean;

    // C^-1/2 y_mean = B z_mean
    p_sigma_ = (1.0 - c_sigma_) * p_sigma_ + std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * (b_ * z_mean);
    ++generation_;
    const double ps_norm = p_sigma_.norm();
    const double correction = std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * generation_));
    const bool h_sigma = ps_norm / correction < (1.4 + 2.0 / (n + 1.0)) * chi_n_;
    p_c_ = (1.0 - c_c_) * p_c_ + (h_sigma ? std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) : 0.0) * y_mean;

    const double delta_h = h_sigma ? 0.0 : c_c_ * (2.0 - c_c_);
    Eigen::MatrixXd rank_mu = y * weights_.asDiagonal() * y.transpose();
    c_ = (1.0 - c_1_ - c_mu_) * c_ + c_1_ * (p_c_ * p_c_.transpose() + delta_h * c_) + c_mu_ * rank_mu;
    c_ = 0.5 * (c_ + c_.transpose());

    sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c_);
    b_ = eig.eigenvectors();
    d_ = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
  }

 private:
  int n_;
  int lambda_;
  int mu_ = 0;
  Eigen::VectorXd weights_;
  double mu_eff_ = 0.0;
  double c_sigma_ = 0.0, d_sigma_ = 0.0, c_c_ = 0.0, c_1_ = 0.0, c_mu_ = 0.0, chi_n_ = 0.0;

  Eigen::VectorXd mean_;
  double sigma_;
  Eigen::VectorXd p_sigma_, p_c_;
  Eigen::MatrixXd c_, b_;
  Eigen::VectorXd d_;
  int generation_ = 0;

  std::mt19937_64 rng_;
  std::vector<Eigen::VectorXd> z_;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Minimizes f from x0 and returns the best point ever evaluated (x0 included).
///
/// Stops on the evaluation budget, when the spread of recent best values and
/// of the current generation drops below f_tolerance, or when the search
/// distribution degenerates.
inline CmaesResult cmaes_minimize(const Objective& f, const Eigen::VectorXd& x0, const CmaesOptions& opts,
                                  bool keep_trace = false) {
  Cmaes es(x0, opts);
  CmaesResult result;
  result.x = x0;
  result.f = f(x0);
  result.evaluations = 1;
  if (!std::isfinite(result.f)) result.f = std::numeric_limits<double>::infinity();

  const int history_len = 10 + static_cast<int>(std::ceil(30.0 * es.dimension() / es.population()));
  std::deque<double> history;

  while (result.evaluations + es.population() <= std::max(opts.max_evaluations, es.population() + 1)) {
    const auto xs = es.ask();
    std::vector<double> fitness(xs.size());
    double gen_best = std::numeric_limits<double>::infinity();
    double gen_worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < xs.size(); ++k) {
      double v = f(xs[k]);
      ++result.evaluations;
      if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
      fitness[k] = v;
      gen_best = std::min(gen_best, v);
      gen_worst = std::max(gen_worst, v);
      if (v < result.f) {
        result.f = v;
        result.x = xs[k];
      }
    }
    es.tell(fitness);
    result.generations = es.generation();
    if (keep_trace) result.trace.push_back({es.generation(), result.evaluations, result.f, es.sigma()});

    history.push_back(gen_best);
    if (static_cast<int>(history.size()) > history_len) history.pop_front();
    const auto [lo, hi] = std::minmax_element(history.begin(), history.end());
    const double spread = std::max(*hi, gen_worst) - std::min(*lo, gen_best);
    if (std::isfinite(spread) && spread < opts.f_tolerance) break;
    if (es.max_axis_step() < 1e-20 * (1.0 + es.mean().cwiseAbs().maxCoeff())) break;
    if (es.condition() > 1e14) break;
    if (result.evaluations >= opts.max_evaluations) break;
  }
  result.min_eigenvalue = es.min_eigenvalue();
  return result;
}

}  // namespace oaipp
