#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "crl/batch.hpp"
#include "crl/policy.hpp"

namespace crl::policy {

struct TrustRegionConfig {
  double max_kl = 0.01;
  double discount = 0.99;
  std::size_t cg_iterations = 10;
  double cg_damping = 0.1;
  std::size_t backtrack_steps = 10;
  double backtrack_ratio = 0.8;
  /// Accepted steps must satisfy mean KL <= kl_tolerance * max_kl.
  double kl_tolerance = 1.5;
  bool normalize_advantages = true;

  void validate() const;
};

/// Least-squares value baseline on features (state, t / horizon, 1).
struct LinearBaseline {
  Eigen::VectorXd weights;

  static Eigen::VectorXd features(const StateVec& state, std::size_t time_step, std::size_t horizon);
  double predict(const StateVec& state, std::size_t time_step, std::size_t horizon) const;
  Eigen::VectorXd predict(const TrajectoryBatch& batch) const;
};

/// Per-step discounted return-to-go of the training rewards, reset at episode boundaries.
Eigen::VectorXd discounted_returns(const TrajectoryBatch& batch, double discount);

/// Ridge-regularized fit of `returns` on the baseline features.
LinearBaseline fit_linear_baseline(const TrajectoryBatch& batch, const Eigen::VectorXd& returns,
                                   double ridge = 1e-5);

/// Return-to-go minus baseline; standardized per batch unless disabled or
/// the variance is below 1e-8.
Eigen::VectorXd estimate_advantages(const TrajectoryBatch& batch, const LinearBaseline& baseline, double discount,
                                    bool normalize = true);

/// Solves A x = b for symmetric positive definite A given as a product.
Eigen::VectorXd conjugate_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& product,
                                   const Eigen::VectorXd& b, std::size_t iterations, double residual_tol = 1e-10);

struct TrustRegionResult {
  bool accepted = false;
  /// Non-finite gradient or direction; the policy was left unchanged.
  bool failed = false;
  std::string failure;
  double realized_kl = 0.0;
  double surrogate_improvement = 0.0;
  double expected_improvement = 0.0;
  std::size_t backtracks = 0;
  /// Natural-gradient search direction (F + damping I)^{-1} g before scaling.
  Eigen::VectorXd direction;
  Eigen::VectorXd gradient;
};

/// Importance-sampled surrogate mean_i exp(logp_new - logp_old) * A_i.
double surrogate(const StochasticPolicy& policy, const Eigen::VectorXd& params, const TrajectoryBatch& batch,
                 const Eigen::VectorXd& advantages);

/// Gradient of `surrogate` with respect to `params`.
Eigen::VectorXd surrogate_gradient(const StochasticPolicy& policy, const Eigen::VectorXd& params,
                                   const TrajectoryBatch& batch, const Eigen::VectorXd& advantages);

Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic> batch_state_matrix(const TrajectoryBatch& batch);

/// One natural-gradient step under a mean-KL constraint, with backtracking.
/// Updates `policy` in place only when a step is accepted.
TrustRegionResult trust_region_step(StochasticPolicy& policy, const TrajectoryBatch& batch,
                                    const Eigen::VectorXd& advantages, const TrustRegionConfig& cfg);

}  // namespace crl::policy
