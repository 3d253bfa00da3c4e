#include "crl/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <thread>

namespace crl::runner {
namespace {

enum Stream : std::uint64_t { EnvStream = 1, PolicyInit = 2, Actions = 3, Clustering = 4, HashProjection = 5 };

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

envs::EnvConfig seeded_env(envs::EnvConfig env, std::uint64_t seed) {
  env.seed = derive_seed(seed, EnvStream);
  return env;
}

policy::StochasticPolicy make_policy(const ExperimentConfig& cfg, const envs::Env& env, std::uint64_t seed) {
  Rng init(derive_seed(seed, PolicyInit));
  return policy::StochasticPolicy::for_action_spec(env.observation_dim(), env.action_spec(), cfg.resolved_hidden(),
                                                   init, cfg.activation);
}

}  // namespace

std::string to_string(BonusKind kind) {
  switch (kind) {
    case BonusKind::Crl:
      return "crl";
    case BonusKind::Hash:
      return "hash";
    default:
      return "none";
  }
}

BonusKind bonus_kind_from_string(const std::string& name) {
  if (name == "crl") return BonusKind::Crl;
  if (name == "hash") return BonusKind::Hash;
  if (name == "none") return BonusKind::None;
  throw ConfigError("bonus.strategy: expected one of crl, hash, none (got '" + name + "')");
}

std::vector<std::size_t> default_hidden(const std::string& env_id) {
  if (env_id == "mountaincar-sparse") return {32, 32};
  return {32};
}

std::vector<std::size_t> ExperimentConfig::resolved_hidden() const {
  return hidden.value_or(default_hidden(env.id));
}

std::size_t ExperimentConfig::resolved_horizon() const {
  return env.horizon.value_or(envs::default_horizon(env.id));
}

void ExperimentConfig::validate() const {
  if (env.id.empty()) throw ConfigError("env.id: missing environment id");
  const auto horizon = resolved_horizon();  // throws for unknown ids
  if (horizon < 1) throw ConfigError("env.horizon must be >= 1");
  if (env.size && *env.size < 2) throw ConfigError("env.size must be >= 2");
  bonus.crl.validate();
  bonus.hash.validate();
  if (bonus.kmeans_max_iters < 1) throw ConfigError("bonus.crl.kmeans_max_iters must be >= 1");
  optimizer.validate();
  for (const auto h : resolved_hidden()) {
    if (h == 0) throw ConfigError("optimizer.hidden: layer sizes must be >= 1");
  }
  if (batch_size < horizon) throw ConfigError("run.batch_size must be at least one horizon");
  if (iterations < 1) throw ConfigError("run.iterations must be >= 1");
  if (seeds.empty()) throw ConfigError("run.seeds must be non-empty");
}

TrainingRun::TrainingRun(ExperimentConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      seed_(seed),
      env_(envs::make_env(seeded_env(config_.env, seed))),
      policy_(make_policy(config_, *env_, seed)),
      action_rng_(derive_seed(seed, Actions)) {
  config_.validate();
  if (config_.bonus.kind == BonusKind::Hash) {
    simhash_ = std::make_unique<bonus::SimHash>(env_->observation_dim(), config_.bonus.hash.code_length,
                                                derive_seed(config_.bonus.hash.seed, derive_seed(seed, HashProjection)));
    hash_table_ = std::make_unique<bonus::HashCountTable>();
  }
}

TrajectoryBatch TrainingRun::collect_batch() {
  TrajectoryBatch batch;
  batch.horizon = env_->horizon();
  const auto budget = config_.batch_size;
  batch.states.reserve(budget);
  batch.actions.reserve(budget);
  batch.log_probs.reserve(budget);
  batch.extrinsic_rewards.reserve(budget);
  batch.time_steps.reserve(budget);

  while (batch.size() < budget) {
    EpisodeSpan episode;
    episode.begin = batch.size();
    StateVec state = env_->reset();
    bool done = false;
    std::size_t t = 0;
    while (!done && batch.size() < budget) {
      auto sample = policy_.sample_action(state, action_rng_);
      auto step = env_->step(sample.action);
      batch.states.push_back(std::move(state));
      batch.actions.push_back(std::move(sample.action));
      batch.log_probs.push_back(sample.log_prob);
      batch.extrinsic_rewards.push_back(step.reward);
      batch.time_steps.push_back(t++);
      episode.goal_reached = episode.goal_reached || step.goal_reached;
      done = step.done;
      state = std::move(step.next_state);
    }
    episode.end = batch.size();
    episode.complete = done;
    batch.episodes.push_back(episode);
  }
  return batch;
}

void TrainingRun::apply_bonuses(TrajectoryBatch& batch, IterationRecord& record) {
  batch.bonuses.assign(batch.size(), 0.0);
  fit_.reset();
  switch (config_.bonus.kind) {
    case BonusKind::Crl: {
      clustering::KMeansOptions options;
      options.k = config_.bonus.crl.k;
      options.seed = derive_seed(derive_seed(seed_, Clustering), iteration_);
      options.max_iters = config_.bonus.kmeans_max_iters;
      options.standardize = config_.bonus.standardize_states;
      fit_ = clustering::kmeans_fit(batch.states, options);
      const auto stats = bonus::cluster_stats(fit_->assignment, batch.extrinsic_rewards, fit_->effective_k);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        batch.bonuses[i] = bonus::crl_bonus_for_cluster(fit_->assignment[i], stats, config_.bonus.crl);
      }
      record.cluster_counts = stats.count;
      record.cluster_rewards = stats.reward_sum;
      record.effective_k = fit_->effective_k;
      record.k_reduced = fit_->k_reduced();
      break;
    }
    case BonusKind::Hash:
      for (std::size_t i = 0; i < batch.size(); ++i) {
        batch.bonuses[i] = bonus::hash_count_bonus(batch.states[i], *simhash_, *hash_table_, config_.bonus.hash);
      }
      record.hash_distinct_codes = hash_table_->distinct_codes();
      break;
    case BonusKind::None:
      break;
  }
  batch.training_rewards = bonus::augment(batch.extrinsic_rewards, batch.bonuses);
}

IterationRecord TrainingRun::run_iteration() {
  const auto start = std::chrono::steady_clock::now();
  IterationRecord record;
  record.iteration = iteration_;

  batch_ = collect_batch();
  apply_bonuses(batch_, record);

  record.mean_extrinsic_return = batch_.mean_complete_return();
  record.complete_episodes = batch_.complete_episodes();
  const auto returns = batch_.episode_returns();
  for (std::size_t e = 0; e < batch_.episodes.size(); ++e) {
    if (batch_.episodes[e].goal_reached) ++record.goal_episodes;
    if (batch_.episodes[e].complete) record.max_episode_return = std::max(record.max_episode_return, returns[e]);
  }
  double bonus_sum = 0.0;
  for (const double b : batch_.bonuses) {
    bonus_sum += b;
    record.max_bonus = std::max(record.max_bonus, b);
  }
  record.mean_bonus = bonus_sum / static_cast<double>(batch_.size());

  const auto& opt = config_.optimizer;
  const auto baseline = policy::fit_linear_baseline(batch_, policy::discounted_returns(batch_, opt.discount));
  const auto advantages = policy::estimate_advantages(batch_, baseline, opt.discount, opt.normalize_advantages);
  const auto update = policy::trust_region_step(policy_, batch_, advantages, opt);
  record.update_accepted = update.accepted;
  record.update_failed = update.failed;
  record.update_failure = update.failure;
  record.realized_kl = update.realized_kl;
  record.surrogate_improvement = update.surrogate_improvement;

  if (config_.record_wall_clock) {
    record.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  ++iteration_;
  return record;
}

std::vector<double> SeedCurve::returns() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.mean_extrinsic_return);
  return out;
}

std::size_t ExperimentResult::failed_seeds() const {
  return static_cast<std::size_t>(std::count_if(curves.begin(), curves.end(), [](const auto& c) { return c.failed; }));
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "iteration,mean_extrinsic_return,mean_bonus,max_bonus,realized_kl,wall_clock_s\n";
  for (const auto& r : records) {
    out << r.iteration << ',' << format_double(r.mean_extrinsic_return) << ',' << format_double(r.mean_bonus) << ','
        << format_double(r.max_bonus) << ',' << format_double(r.realized_kl) << ',' << format_double(r.wall_clock_s)
        << '\n';
  }
}

void mean_and_std(const std::vector<std::vector<double>>& curves, std::vector<double>& mean,
                  std::vector<double>& stddev) {
  mean.clear();
  stddev.clear();
  if (curves.empty()) return;
  std::size_t length = curves.front().size();
  for (const auto& c : curves) length = std::min(length, c.size());
  const auto n = static_cast<double>(curves.size());
  for (std::size_t t = 0; t < length; ++t) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c[t];
    const double m = sum / n;
    double sq = 0.0;
    for (const auto& c : curves) sq += (c[t] - m) * (c[t] - m);
    mean.push_back(m);
    stddev.push_back(std::sqrt(sq / n));
  }
}

namespace {

SeedCurve run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  SeedCurve curve;
  curve.seed = seed;
  try {
    TrainingRun run(config, seed);
    for (std::size_t it = 0; it < config.iterations; ++it) curve.records.push_back(run.run_iteration());
    if (!config.output_dir.empty()) {
      curve.csv_path = config.output_dir / ("seed_" + std::to_string(seed) + ".csv");
      write_curve_csv(curve.csv_path, curve.records);
    }
  } catch (const std::exception& e) {
    curve.failed = true;
    curve.error = e.what();
  }
  return curve;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (!config.output_dir.empty()) std::filesystem::create_directories(config.output_dir);

  ExperimentResult result;
  result.curves.resize(config.seeds.size());
  const std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  for (std::size_t first = 0; first < config.seeds.size(); first += workers) {
    const std::size_t last = std::min(config.seeds.size(), first + workers);
    std::vector<std::future<SeedCurve>> pending;
    for (std::size_t i = first; i < last; ++i) {
      if (workers == 1) {
        result.curves[i] = run_seed(config, config.seeds[i]);
      } else {
        pending.push_back(std::async(std::launch::async, run_seed, std::cref(config), config.seeds[i]));
      }
    }
    for (std::size_t i = 0; i < pending.size(); ++i) result.curves[first + i] = pending[i].get();
  }

  std::vector<std::vector<double>> ok;
  for (const auto& c : result.curves) {
    if (!c.failed) ok.push_back(c.returns());
  }
  mean_and_std(ok, result.mean_return, result.std_return);

  if (!config.output_dir.empty()) {
    result.summary_path = config.output_dir / "summary.csv";
    std::ofstream out(result.summary_path, std::ios::binary | std::ios::trunc);
    out << "iteration,mean_return,std_return,seeds\n";
    for (std::size_t t = 0; t < result.mean_return.size(); ++t) {
      out << t << ',' << format_double(result.mean_return[t]) << ',' << format_double(result.std_return[t]) << ','
          << ok.size() << '\n';
    }
  }
  return result;
}

}  // namespace crl::runner
