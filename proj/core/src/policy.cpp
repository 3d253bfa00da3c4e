#include "crl/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace crl::policy {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

// Column-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    const double m = logits.col(i).maxCoeff();
    const double lse = m + std::log((logits.col(i).array() - m).exp().sum());
    out.col(i) = logits.col(i).array() - lse;
  }
  return out;
}

}  // namespace

BatchActions BatchActions::from(std::span<const Action> actions) {
  BatchActions out;
  if (actions.empty()) return out;
  if (actions.front().kind == ActionKind::Discrete) {
    out.discrete.reserve(actions.size());
    for (const auto& a : actions) out.discrete.push_back(a.index);
  } else {
    const auto dim = actions.front().values.size();
    out.continuous.resize(dim, static_cast<Eigen::Index>(actions.size()));
    for (std::size_t i = 0; i < actions.size(); ++i) out.continuous.col(static_cast<Eigen::Index>(i)) = actions[i].values;
  }
  return out;
}

StochasticPolicy::StochasticPolicy(MlpArchitecture architecture, DistributionFamily family, Rng& init_rng,
                                   double initial_log_std)
    : network_(std::move(architecture)), family_(family) {
  if (family_ == DistributionFamily::Categorical && output_dim() < 2) {
    throw std::invalid_argument("categorical policy needs at least 2 outputs");
  }
  params_.resize(static_cast<Eigen::Index>(parameter_count()));
  params_.head(network_size()) = network_.initial_parameters(init_rng);
  if (family_ == DistributionFamily::Gaussian) {
    params_.tail(static_cast<Eigen::Index>(output_dim())).setConstant(initial_log_std);
  }
}

StochasticPolicy::StochasticPolicy(const PolicySnapshot& snapshot)
    : network_(snapshot.architecture), family_(snapshot.family) {
  set_parameters(snapshot.parameters);
}

StochasticPolicy StochasticPolicy::for_action_spec(std::size_t observation_dim, const envs::ActionSpec& spec,
                                                   std::vector<std::size_t> hidden, Rng& init_rng,
                                                   Activation activation) {
  MlpArchitecture arch{observation_dim, std::move(hidden), spec.output_dim(), activation};
  const auto family =
      spec.kind == ActionKind::Continuous ? DistributionFamily::Gaussian : DistributionFamily::Categorical;
  return StochasticPolicy(std::move(arch), family, init_rng);
}

PolicySnapshot StochasticPolicy::snapshot() const { return {network_.architecture(), family_, params_}; }

std::size_t StochasticPolicy::parameter_count() const {
  return network_.parameter_count() + (family_ == DistributionFamily::Gaussian ? output_dim() : 0);
}

void StochasticPolicy::set_parameters(Eigen::VectorXd params) {
  if (params.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw std::invalid_argument("policy parameter vector has wrong size");
  }
  if (!params.allFinite()) throw std::invalid_argument("policy parameters must be finite");
  params_ = std::move(params);
}

ActionSample StochasticPolicy::sample_action(const StateVec& state, Rng& rng) const {
  if (static_cast<std::size_t>(state.size()) != input_dim()) {
    throw std::invalid_argument("sample_action: state dimension mismatch");
  }
  const auto dist = evaluate(params_, state);
  if (family_ == DistributionFamily::Gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index dim = dist.outputs.rows();
    Eigen::VectorXd action(dim);
    double log_prob = 0.0;
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double eps = normal(rng);
      action[d] = dist.outputs(d, 0) + std::exp(dist.log_std[d]) * eps;
      log_prob += -0.5 * eps * eps - dist.log_std[d] - kHalfLog2Pi;
    }
    return {Action::continuous(std::move(action)), log_prob};
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  const auto& lp = dist.log_probs_table;
  std::size_t chosen = static_cast<std::size_t>(lp.rows()) - 1;
  double running = 0.0;
  for (Eigen::Index a = 0; a < lp.rows(); ++a) {
    running += std::exp(lp(a, 0));
    if (u < running) {
      chosen = static_cast<std::size_t>(a);
      break;
    }
  }
  return {Action::discrete(chosen), lp(static_cast<Eigen::Index>(chosen), 0)};
}

double StochasticPolicy::log_prob(const StateVec& state, const Action& action) const {
  const auto dist = evaluate(params_, state);
  const Action actions[] = {action};
  return log_probs(dist, BatchActions::from(actions))[0];
}

BatchDistribution StochasticPolicy::evaluate(const Eigen::VectorXd& params, const Eigen::MatrixXd& states) const {
  BatchDistribution dist;
  dist.outputs = network_.forward(params.head(network_size()), states, &dist.cache);
  if (family_ == DistributionFamily::Gaussian) {
    dist.log_std = params.tail(static_cast<Eigen::Index>(output_dim()));
  } else {
    dist.log_probs_table = log_softmax(dist.outputs);
  }
  return dist;
}

Eigen::VectorXd StochasticPolicy::log_probs(const BatchDistribution& dist, const BatchActions& actions) const {
  const Eigen::Index n = dist.size();
  Eigen::VectorXd out(n);
  if (family_ == DistributionFamily::Gaussian) {
    if (actions.continuous.cols() != n) throw std::invalid_argument("log_probs: batch size mismatch");
    const Eigen::ArrayXd inv_std = (-dist.log_std.array()).exp();
    const double log_norm = dist.log_std.sum() + kHalfLog2Pi * static_cast<double>(dist.log_std.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::ArrayXd z = (actions.continuous.col(i) - dist.outputs.col(i)).array() * inv_std;
      out[i] = -0.5 * z.square().sum() - log_norm;
    }
    return out;
  }
  if (static_cast<Eigen::Index>(actions.discrete.size()) != n) {
    throw std::invalid_argument("log_probs: batch size mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = dist.log_probs_table(static_cast<Eigen::Index>(actions.discrete[static_cast<std::size_t>(i)]), i);
  }
  return out;
}

Eigen::VectorXd StochasticPolicy::weighted_log_prob_gradient(const Eigen::VectorXd& params,
                                                             const BatchDistribution& dist,
                                                             const BatchActions& actions,
                                                             const Eigen::VectorXd& weights) const {
  const Eigen::Index n = dist.size();
  if (weights.size() != n) throw std::invalid_argument("weighted_log_prob_gradient: weights size mismatch");
  Eigen::VectorXd grad(static_cast<Eigen::Index>(parameter_count()));
  Eigen::MatrixXd output_grad(dist.outputs.rows(), n);

  if (family_ == DistributionFamily::Gaussian) {
    const Eigen::ArrayXd inv_var = (-2.0 * dist.log_std.array()).exp();
    Eigen::VectorXd log_std_grad = Eigen::VectorXd::Zero(dist.log_std.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::ArrayXd diff = (actions.continuous.col(i) - dist.outputs.col(i)).array();
      output_grad.col(i) = (weights[i] * diff * inv_var).matrix();
      log_std_grad += (weights[i] * (diff.square() * inv_var - 1.0)).matrix();
    }
    grad.head(network_size()) = network_.backward(params.head(network_size()), dist.cache, output_grad);
    grad.tail(dist.log_std.size()) = log_std_grad;
    return grad;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    output_grad.col(i) = -weights[i] * dist.log_probs_table.col(i).array().exp();
    output_grad(static_cast<Eigen::Index>(actions.discrete[static_cast<std::size_t>(i)]), i) += weights[i];
  }
  grad = network_.backward(params.head(network_size()), dist.cache, output_grad);
  return grad;
}

double StochasticPolicy::mean_kl(const BatchDistribution& old, const BatchDistribution& current) const {
  const Eigen::Index n = old.size();
  if (current.size() != n) throw std::invalid_argument("mean_kl: batch size mismatch");
  if (n == 0) return 0.0;
  double total = 0.0;
  if (family_ == DistributionFamily::Gaussian) {
    const Eigen::ArrayXd old_var = (2.0 * old.log_std.array()).exp();
    const Eigen::ArrayXd new_var = (2.0 * current.log_std.array()).exp();
    const double log_ratio = (current.log_std - old.log_std).sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::ArrayXd diff = (old.outputs.col(i) - current.outputs.col(i)).array();
      total += log_ratio + ((old_var + diff.square()) / (2.0 * new_var) - 0.5).sum();
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::ArrayXd lp_old = old.log_probs_table.col(i).array();
      total += (lp_old.exp() * (lp_old - current.log_probs_table.col(i).array())).sum();
    }
  }
  return total / static_cast<double>(n);
}

Eigen::VectorXd StochasticPolicy::fisher_vector_product(const Eigen::VectorXd& params, const BatchDistribution& dist,
                                                        const Eigen::VectorXd& v) const {
  if (v.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw std::invalid_argument("fisher_vector_product: vector has wrong size");
  }
  const Eigen::Index n = dist.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::VectorXd net_params = params.head(network_size());
  const Eigen::MatrixXd jv = network_.jvp(net_params, dist.cache, v.head(network_size()));

  Eigen::VectorXd out(v.size());
  if (family_ == DistributionFamily::Gaussian) {
    const Eigen::VectorXd inv_var = (-2.0 * dist.log_std.array()).exp().matrix();
    const Eigen::MatrixXd weighted = inv_var.asDiagonal() * jv * inv_n;
    out.head(network_size()) = network_.backward(net_params, dist.cache, weighted);
    out.tail(dist.log_std.size()) = 2.0 * v.tail(dist.log_std.size());
    return out;
  }
  Eigen::MatrixXd weighted(jv.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd p = dist.log_probs_table.col(i).array().exp().matrix();
    const double pu = p.dot(jv.col(i));
    weighted.col(i) = (p.array() * (jv.col(i).array() - pu)).matrix() * inv_n;
  }
  out = network_.backward(net_params, dist.cache, weighted);
  return out;
}

}  // namespace crl::policy
