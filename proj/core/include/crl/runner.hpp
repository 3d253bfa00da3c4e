#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crl/batch.hpp"
#include "crl/bonus.hpp"
#include "crl/clustering.hpp"
#include "crl/envs.hpp"
#include "crl/policy.hpp"
#include "crl/trust_region.hpp"

namespace crl::runner {

enum class BonusKind { Crl, Hash, None };

std::string to_string(BonusKind kind);
/// Accepts "crl", "hash", "none"; throws ConfigError otherwise.
BonusKind bonus_kind_from_string(const std::string& name);

struct BonusStrategy {
  BonusKind kind = BonusKind::Crl;
  bonus::CrlBonusConfig crl;
  bonus::HashBonusConfig hash;
  std::size_t kmeans_max_iters = 50;
  bool standardize_states = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  envs::EnvConfig env;
  BonusStrategy bonus;
  policy::TrustRegionConfig optimizer;
  /// Policy hidden layers; the environment default applies when unset.
  std::optional<std::vector<std::size_t>> hidden;
  policy::Activation activation = policy::Activation::Tanh;
  std::size_t batch_size = 5000;
  std::size_t iterations = 30;
  std::vector<std::uint64_t> seeds{0};
  /// Per-seed CSVs and the summary go here; nothing is written when empty.
  std::filesystem::path output_dir;
  /// When false the wall_clock_s column is written as 0 so output bytes are
  /// reproducible.
  bool record_wall_clock = true;

  std::vector<std::size_t> resolved_hidden() const;
  std::size_t resolved_horizon() const;
  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// (32, 32) for MountainCar, (32) for the tabular environments.
std::vector<std::size_t> default_hidden(const std::string& env_id);

struct IterationRecord {
  std::size_t iteration = 0;
  /// Mean extrinsic return over complete episodes of the batch.
  double mean_extrinsic_return = 0.0;
  double max_episode_return = 0.0;
  std::size_t complete_episodes = 0;
  std::size_t goal_episodes = 0;
  double mean_bonus = 0.0;
  double max_bonus = 0.0;
  std::vector<std::size_t> cluster_counts;  // N_k
  std::vector<double> cluster_rewards;      // R_k
  std::size_t effective_k = 0;
  bool k_reduced = false;
  std::size_t hash_distinct_codes = 0;
  double realized_kl = 0.0;
  double surrogate_improvement = 0.0;
  bool update_accepted = false;
  bool update_failed = false;
  std::string update_failure;
  double wall_clock_s = 0.0;
};

/// One seed's training run: owns the environment, policy and bonus state.
class TrainingRun {
 public:
  TrainingRun(ExperimentConfig config, std::uint64_t seed);

  /// Collect -> cluster -> tally -> bonus -> trust-region update.
  IterationRecord run_iteration();

  std::size_t iteration() const { return iteration_; }
  std::uint64_t seed() const { return seed_; }
  const ExperimentConfig& config() const { return config_; }
  const policy::StochasticPolicy& policy() const { return policy_; }
  /// Batch of the most recent iteration, with bonuses and training rewards filled in.
  const TrajectoryBatch& last_batch() const { return batch_; }
  /// Cluster fit of the most recent iteration (CRL strategy only).
  const std::optional<clustering::KMeansFit>& last_fit() const { return fit_; }
  const bonus::HashCountTable* hash_table() const { return hash_table_.get(); }

  TrajectoryBatch collect_batch();
  /// Fills `batch.bonuses` and `batch.training_rewards` per the configured strategy.
  void apply_bonuses(TrajectoryBatch& batch, IterationRecord& record);

 private:
  ExperimentConfig config_;
  std::uint64_t seed_;
  std::unique_ptr<envs::Env> env_;
  policy::StochasticPolicy policy_;
  Rng action_rng_;
  std::unique_ptr<bonus::SimHash> simhash_;
  std::unique_ptr<bonus::HashCountTable> hash_table_;
  TrajectoryBatch batch_;
  std::optional<clustering::KMeansFit> fit_;
  std::size_t iteration_ = 0;
};

struct SeedCurve {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<IterationRecord> records;
  std::filesystem::path csv_path;

  std::vector<double> returns() const;
};

struct ExperimentResult {
  std::vector<SeedCurve> curves;
  /// Across successful seeds, per iteration; std is the population standard deviation.
  std::vector<double> mean_return;
  std::vector<double> std_return;
  std::filesystem::path summary_path;

  std::size_t failed_seeds() const;
};

/// Runs every seed (in parallel when hardware allows). A failing seed is
/// marked failed without affecting the others.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Header: iteration,mean_extrinsic_return,mean_bonus,max_bonus,realized_kl,wall_clock_s
void write_curve_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& records);

/// Across-seed mean and population std per iteration, truncated to the shortest curve.
void mean_and_std(const std::vector<std::vector<double>>& curves, std::vector<double>& mean, std::vector<double>& stddev);

}  // namespace crl::runner
