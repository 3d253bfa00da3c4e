#include "crl/trust_region.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace crl {

std::vector<double> TrajectoryBatch::episode_returns() const {
  std::vector<double> out;
  out.reserve(episodes.size());
  for (const auto& ep : episodes) {
    double total = 0.0;
    for (std::size_t i = ep.begin; i < ep.end; ++i) total += extrinsic_rewards[i];
    out.push_back(total);
  }
  return out;
}

std::size_t TrajectoryBatch::complete_episodes() const {
  std::size_t n = 0;
  for (const auto& ep : episodes) n += ep.complete ? 1 : 0;
  return n;
}

double TrajectoryBatch::mean_complete_return() const {
  const auto returns = episode_returns();
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    if (!episodes[e].complete) continue;
    total += returns[e];
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

}  // namespace crl

namespace crl::policy {

void TrustRegionConfig::validate() const {
  if (!(max_kl > 0.0)) throw ConfigError("optimizer.max_kl must be > 0");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("optimizer.discount must be in [0, 1]");
  if (cg_iterations < 1) throw ConfigError("optimizer.cg_iterations must be >= 1");
  if (!(cg_damping >= 0.0)) throw ConfigError("optimizer.cg_damping must be >= 0");
  if (backtrack_steps < 1) throw ConfigError("optimizer.backtrack_steps must be >= 1");
  if (!(backtrack_ratio > 0.0 && backtrack_ratio < 1.0)) {
    throw ConfigError("optimizer.backtrack_ratio must be in (0, 1)");
  }
  if (!(kl_tolerance >= 1.0)) throw ConfigError("optimizer.kl_tolerance must be >= 1");
}

Eigen::VectorXd LinearBaseline::features(const StateVec& state, std::size_t time_step, std::size_t horizon) {
  Eigen::VectorXd f(state.size() + 2);
  f.head(state.size()) = state;
  f[state.size()] = static_cast<double>(time_step) / static_cast<double>(horizon);
  f[state.size() + 1] = 1.0;
  return f;
}

double LinearBaseline::predict(const StateVec& state, std::size_t time_step, std::size_t horizon) const {
  return weights.dot(features(state, time_step, horizon));
}

Eigen::VectorXd LinearBaseline::predict(const TrajectoryBatch& batch) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = predict(batch.states[i], batch.time_steps[i], batch.horizon);
  }
  return out;
}

Eigen::VectorXd discounted_returns(const TrajectoryBatch& batch, double discount) {
  Eigen::VectorXd returns(static_cast<Eigen::Index>(batch.size()));
  for (const auto& ep : batch.episodes) {
    double running = 0.0;
    for (std::size_t i = ep.end; i-- > ep.begin;) {
      running = batch.training_rewards[i] + discount * running;
      returns[static_cast<Eigen::Index>(i)] = running;
    }
  }
  return returns;
}

LinearBaseline fit_linear_baseline(const TrajectoryBatch& batch, const Eigen::VectorXd& returns, double ridge) {
  if (batch.size() == 0) throw std::invalid_argument("fit_linear_baseline: empty batch");
  if (returns.size() != static_cast<Eigen::Index>(batch.size())) {
    throw std::invalid_argument("fit_linear_baseline: returns size mismatch");
  }
  const Eigen::Index p = batch.states.front().size() + 2;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(batch.size()), p);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = LinearBaseline::features(batch.states[i], batch.time_steps[i], batch.horizon);
  }
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += ridge;
  return {gram.ldlt().solve(x.transpose() * returns)};
}

Eigen::VectorXd estimate_advantages(const TrajectoryBatch& batch, const LinearBaseline& baseline, double discount,
                                    bool normalize) {
  Eigen::VectorXd adv = discounted_returns(batch, discount) - baseline.predict(batch);
  if (!normalize || adv.size() == 0) return adv;
  const double mean = adv.mean();
  const double var = (adv.array() - mean).square().mean();
  if (var < 1e-8) return adv;
  return (adv.array() - mean) / std::sqrt(var);
}

Eigen::VectorXd conjugate_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& product,
                                   const Eigen::VectorXd& b, std::size_t iterations, double residual_tol) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = b;
  double rr = r.squaredNorm();
  for (std::size_t it = 0; it < iterations && rr > residual_tol; ++it) {
    const Eigen::VectorXd ap = product(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return x;
}

Eigen::MatrixXd batch_state_matrix(const TrajectoryBatch& batch) {
  if (batch.size() == 0) return {};
  Eigen::MatrixXd states(batch.states.front().size(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) states.col(static_cast<Eigen::Index>(i)) = batch.states[i];
  return states;
}

namespace {

struct SurrogateTerms {
  BatchDistribution dist;
  Eigen::VectorXd ratios;
  double value = 0.0;
};

Eigen::VectorXd stored_log_probs(const TrajectoryBatch& batch) {
  return Eigen::Map<const Eigen::VectorXd>(batch.log_probs.data(), static_cast<Eigen::Index>(batch.log_probs.size()));
}

SurrogateTerms surrogate_terms(const StochasticPolicy& policy, const Eigen::VectorXd& params,
                               const Eigen::MatrixXd& states, const BatchActions& actions,
                               const Eigen::VectorXd& old_log_probs, const Eigen::VectorXd& advantages) {
  SurrogateTerms t;
  t.dist = policy.evaluate(params, states);
  t.ratios = (policy.log_probs(t.dist, actions) - old_log_probs).array().exp();
  t.value = t.ratios.dot(advantages) / static_cast<double>(advantages.size());
  return t;
}

void check_batch(const TrajectoryBatch& batch, const Eigen::VectorXd& advantages) {
  if (batch.size() == 0) throw std::invalid_argument("trust region: empty batch");
  if (advantages.size() != static_cast<Eigen::Index>(batch.size()) || batch.log_probs.size() != batch.size() ||
      batch.actions.size() != batch.size()) {
    throw std::invalid_argument("trust region: batch columns have inconsistent lengths");
  }
}

}  // namespace

double surrogate(const StochasticPolicy& policy, const Eigen::VectorXd& params, const TrajectoryBatch& batch,
                 const Eigen::VectorXd& advantages) {
  check_batch(batch, advantages);
  return surrogate_terms(policy, params, batch_state_matrix(batch), BatchActions::from(batch.actions),
                         stored_log_probs(batch), advantages)
      .value;
}

Eigen::VectorXd surrogate_gradient(const StochasticPolicy& policy, const Eigen::VectorXd& params,
                                   const TrajectoryBatch& batch, const Eigen::VectorXd& advantages) {
  check_batch(batch, advantages);
  const auto actions = BatchActions::from(batch.actions);
  const auto t = surrogate_terms(policy, params, batch_state_matrix(batch), actions, stored_log_probs(batch), advantages);
  const Eigen::VectorXd weights =
      t.ratios.cwiseProduct(advantages) / static_cast<double>(advantages.size());
  return policy.weighted_log_prob_gradient(params, t.dist, actions, weights);
}

TrustRegionResult trust_region_step(StochasticPolicy& policy, const TrajectoryBatch& batch,
                                    const Eigen::VectorXd& advantages, const TrustRegionConfig& cfg) {
  check_batch(batch, advantages);
  TrustRegionResult result;

  const Eigen::VectorXd theta = policy.parameters();
  const Eigen::MatrixXd states = batch_state_matrix(batch);
  const auto actions = BatchActions::from(batch.actions);
  const Eigen::VectorXd old_log_probs = stored_log_probs(batch);

  const auto before = surrogate_terms(policy, theta, states, actions, old_log_probs, advantages);
  const Eigen::VectorXd weights = before.ratios.cwiseProduct(advantages) / static_cast<double>(advantages.size());
  result.gradient = policy.weighted_log_prob_gradient(theta, before.dist, actions, weights);
  if (!result.gradient.allFinite() || !std::isfinite(before.value)) {
    result.failed = true;
    result.failure = "non-finite surrogate gradient";
    return result;
  }
  if (result.gradient.squaredNorm() == 0.0) return result;

  const auto fisher = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return policy.fisher_vector_product(theta, before.dist, v) + cfg.cg_damping * v;
  };
  result.direction = conjugate_gradient(fisher, result.gradient, cfg.cg_iterations);
  const double quad = result.direction.dot(fisher(result.direction));
  if (!result.direction.allFinite() || !std::isfinite(quad) || !(quad > 0.0)) {
    result.failed = true;
    result.failure = "non-finite or degenerate natural-gradient direction";
    return result;
  }

  const Eigen::VectorXd full_step = std::sqrt(2.0 * cfg.max_kl / quad) * result.direction;
  result.expected_improvement = result.gradient.dot(full_step);

  double fraction = 1.0;
  for (std::size_t k = 0; k < cfg.backtrack_steps; ++k, fraction *= cfg.backtrack_ratio) {
    const Eigen::VectorXd candidate = theta + fraction * full_step;
    const auto after = surrogate_terms(policy, candidate, states, actions, old_log_probs, advantages);
    const double kl = policy.mean_kl(before.dist, after.dist);
    const double improvement = after.value - before.value;
    if (std::isfinite(kl) && std::isfinite(improvement) && kl <= cfg.kl_tolerance * cfg.max_kl && improvement > 0.0) {
      policy.set_parameters(candidate);
      result.accepted = true;
      result.realized_kl = kl;
      result.surrogate_improvement = improvement;
      result.backtracks = k;
      return result;
    }
  }
  result.backtracks = cfg.backtrack_steps;
  return result;
}

}  // namespace crl::policy
