#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "crl/envs.hpp"
#include "crl/mlp.hpp"
#include "crl/types.hpp"

namespace crl::policy {

enum class DistributionFamily { Gaussian, Categorical };

/// Everything needed to rebuild a policy: network shape, family and the flat
/// parameter vector (network parameters followed by log-std for Gaussians).
struct PolicySnapshot {
  MlpArchitecture architecture;
  DistributionFamily family = DistributionFamily::Gaussian;
  Eigen::VectorXd parameters;
};

struct ActionSample {
  Action action;
  double log_prob = 0.0;
};

/// Distribution parameters for a batch of states at one parameter vector.
struct BatchDistribution {
  Eigen::MatrixXd outputs;  // Gaussian means or categorical logits, out x N
  Eigen::MatrixXd log_probs_table;  // categorical log-softmax, out x N
  Eigen::VectorXd log_std;  // Gaussian only
  Mlp::Cache cache;

  Eigen::Index size() const { return outputs.cols(); }
};

/// Actions of a batch: continuous as a dim x N matrix, discrete as indices.
struct BatchActions {
  Eigen::MatrixXd continuous;
  std::vector<std::size_t> discrete;

  static BatchActions from(std::span<const Action> actions);
};

/// Gaussian (state-independent learned log-std) or categorical policy on top of an MLP.
class StochasticPolicy {
 public:
  StochasticPolicy(MlpArchitecture architecture, DistributionFamily family, Rng& init_rng,
                   double initial_log_std = 0.0);
  explicit StochasticPolicy(const PolicySnapshot& snapshot);

  /// Gaussian for continuous specs, categorical for discrete ones.
  static StochasticPolicy for_action_spec(std::size_t observation_dim, const envs::ActionSpec& spec,
                                          std::vector<std::size_t> hidden, Rng& init_rng,
                                          Activation activation = Activation::Tanh);

  PolicySnapshot snapshot() const;
  DistributionFamily family() const { return family_; }
  const Mlp& network() const { return network_; }
  std::size_t parameter_count() const;
  std::size_t output_dim() const { return network_.architecture().output_dim; }
  std::size_t input_dim() const { return network_.architecture().input_dim; }

  const Eigen::VectorXd& parameters() const { return params_; }
  void set_parameters(Eigen::VectorXd params);

  ActionSample sample_action(const StateVec& state, Rng& rng) const;
  double log_prob(const StateVec& state, const Action& action) const;

  BatchDistribution evaluate(const Eigen::VectorXd& params, const Eigen::MatrixXd& states) const;
  Eigen::VectorXd log_probs(const BatchDistribution& dist, const BatchActions& actions) const;

  /// Gradient with respect to `params` of sum_i weights_i * log pi(a_i | s_i).
  /// `dist` must have been evaluated at `params`.
  Eigen::VectorXd weighted_log_prob_gradient(const Eigen::VectorXd& params, const BatchDistribution& dist,
                                             const BatchActions& actions, const Eigen::VectorXd& weights) const;

  /// Mean over the batch of KL(old || current).
  double mean_kl(const BatchDistribution& old, const BatchDistribution& current) const;

  /// Product of the mean Fisher information at `params` (where `dist` was
  /// evaluated) with `v`. Equals the Hessian of mean_kl at the old parameters.
  Eigen::VectorXd fisher_vector_product(const Eigen::VectorXd& params, const BatchDistribution& dist,
                                        const Eigen::VectorXd& v) const;

 private:
  Eigen::Index network_size() const { return static_cast<Eigen::Index>(network_.parameter_count()); }

  Mlp network_;
  DistributionFamily family_;
  Eigen::VectorXd params_;
};

}  // namespace crl::policy
