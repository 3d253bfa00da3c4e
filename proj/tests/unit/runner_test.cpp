#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "crl/runner.hpp"

using namespace crl;
using namespace crl::runner;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small(const std::string& env, std::size_t size, BonusKind kind) {
  ExperimentConfig c;
  c.name = "t";
  c.env.id = env;
  c.env.size = size;
  c.env.horizon = 20;
  c.bonus.kind = kind;
  c.bonus.crl.k = 10;
  c.batch_size = 200;
  c.iterations = 3;
  c.hidden = std::vector<std::size_t>{8};
  c.record_wall_clock = false;
  return c;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("crl_runner_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(RunnerTest, NoneStrategyHasZeroBonuses) {
  TrainingRun run(small("chain", 6, BonusKind::None), 0);
  for (int i = 0; i < 3; ++i) {
    const auto rec = run.run_iteration();
    EXPECT_EQ(rec.mean_bonus, 0.0);
    EXPECT_EQ(rec.max_bonus, 0.0);
    EXPECT_EQ(run.last_batch().training_rewards, run.last_batch().extrinsic_rewards);
  }
}

TEST(RunnerTest, ZeroRewardCrlMatchesNone) {
  // The goal of a 40-state chain is out of reach within 20 steps, so every
  // batch is reward-free.
  TrainingRun crl(small("chain", 40, BonusKind::Crl), 5);
  TrainingRun none(small("chain", 40, BonusKind::None), 5);
  for (int i = 0; i < 3; ++i) {
    const auto a = crl.run_iteration();
    none.run_iteration();
    EXPECT_EQ(a.max_bonus, 0.0);
    EXPECT_EQ(crl.last_batch().states, none.last_batch().states);
    EXPECT_EQ(crl.policy().parameters(), none.policy().parameters());
  }
}

TEST(RunnerTest, BetaZeroAblationMatchesNone) {
  auto cfg = small("gridworld-sparse", 3, BonusKind::Crl);
  cfg.bonus.crl.beta = 0.0;
  TrainingRun crl(cfg, 2);
  TrainingRun none(small("gridworld-sparse", 3, BonusKind::None), 2);
  std::size_t goals = 0;
  for (int i = 0; i < 4; ++i) {
    goals += crl.run_iteration().goal_episodes;
    none.run_iteration();
    EXPECT_EQ(crl.policy().parameters(), none.policy().parameters());
  }
  EXPECT_GT(goals, 0u);
}

TEST(RunnerTest, ChainClusterCountsMatchTabularOracle) {
  TrainingRun run(small("chain", 10, BonusKind::Crl), 3);
  for (int i = 0; i < 3; ++i) {
    const auto rec = run.run_iteration();
    const auto& batch = run.last_batch();
    const auto& centers = run.last_fit()->centers.centers;
    std::map<std::vector<double>, std::pair<std::size_t, double>> table;
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const std::vector<double> key(batch.states[s].data(), batch.states[s].data() + batch.states[s].size());
      table[key].first += 1;
      table[key].second += batch.extrinsic_rewards[s];
    }
    ASSERT_EQ(rec.effective_k, table.size());
    ASSERT_EQ(rec.cluster_counts.size(), table.size());
    for (Eigen::Index k = 0; k < centers.rows(); ++k) {
      std::vector<double> c(static_cast<std::size_t>(centers.cols()));
      for (Eigen::Index j = 0; j < centers.cols(); ++j) c[static_cast<std::size_t>(j)] = centers(k, j);
      ASSERT_TRUE(table.count(c));
      EXPECT_EQ(rec.cluster_counts[static_cast<std::size_t>(k)], table[c].first);
      EXPECT_EQ(rec.cluster_rewards[static_cast<std::size_t>(k)], table[c].second);
    }
  }
}

TEST(RunnerTest, EvaluationUsesExtrinsicRewardsOnly) {
  auto cfg = small("chain", 8, BonusKind::Crl);
  cfg.bonus.crl.beta = 5.0;
  TrainingRun run(cfg, 1);
  for (int i = 0; i < 3; ++i) {
    const auto rec = run.run_iteration();
    const auto& b = run.last_batch();
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& ep : b.episodes) {
      if (!ep.complete) continue;
      for (std::size_t t = ep.begin; t < ep.end; ++t) sum += b.extrinsic_rewards[t];
      ++n;
    }
    EXPECT_EQ(rec.mean_extrinsic_return, n ? sum / static_cast<double>(n) : 0.0);
    for (std::size_t t = 0; t < b.size(); ++t) EXPECT_EQ(b.training_rewards[t], b.extrinsic_rewards[t] + b.bonuses[t]);
  }
}

TEST(RunnerTest, BatchBudgetTruncatesLastEpisode) {
  auto cfg = small("chain", 40, BonusKind::None);
  cfg.batch_size = 50;
  TrainingRun run(cfg, 0);
  const auto b = run.collect_batch();
  EXPECT_EQ(b.size(), 50u);
  ASSERT_EQ(b.episodes.size(), 3u);
  EXPECT_TRUE(b.episodes[0].complete);
  EXPECT_FALSE(b.episodes[2].complete);
  EXPECT_EQ(b.complete_episodes(), 2u);
  for (const auto& ep : b.episodes) EXPECT_LE(ep.length(), 20u);
}

TEST(RunnerTest, ClustersCarryNoStateAcrossIterations) {
  const auto cfg = small("chain", 10, BonusKind::Crl);
  TrainingRun run(cfg, 4);
  for (int i = 0; i < 3; ++i) run.run_iteration();
  TrajectoryBatch copy = run.last_batch();
  TrainingRun fresh(cfg, 4);
  IterationRecord rec;
  fresh.apply_bonuses(copy, rec);
  EXPECT_EQ(copy.bonuses, run.last_batch().bonuses);
}

TEST(RunnerTest, HashCountsPersistAcrossIterations) {
  TrainingRun run(small("chain", 6, BonusKind::Hash), 0);
  run.run_iteration();
  const auto after_one = run.hash_table()->distinct_codes();
  std::uint64_t total = 0;
  run.run_iteration();
  EXPECT_GE(run.hash_table()->distinct_codes(), after_one);
  // Every bonus equals beta / sqrt(n) for some n >= 1.
  for (const double x : run.last_batch().bonuses) {
    const double n = std::pow(0.01 / x, 2.0);
    EXPECT_NEAR(n, std::round(n), 1e-6 * n);
    total += static_cast<std::uint64_t>(std::round(n));
  }
  EXPECT_GT(total, 0u);
}

TEST(RunExperimentTest, MinimalRunHasOnePoint) {
  auto cfg = small("chain", 6, BonusKind::None);
  cfg.iterations = 1;
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.curves.size(), 1u);
  EXPECT_EQ(r.curves[0].records.size(), 1u);
  EXPECT_EQ(r.mean_return.size(), 1u);
}

TEST(RunExperimentTest, RepeatRunsProduceIdenticalBytes) {
  for (auto kind : {BonusKind::None, BonusKind::Crl, BonusKind::Hash}) {
    auto cfg = small("gridworld-sparse", 4, kind);
    cfg.seeds = {0, 1};
    cfg.output_dir = scratch("repeat_a");
    run_experiment(cfg);
    const auto a0 = slurp(cfg.output_dir / "seed_0.csv");
    const auto a1 = slurp(cfg.output_dir / "seed_1.csv");
    const auto as = slurp(cfg.output_dir / "summary.csv");
    cfg.output_dir = scratch("repeat_b");
    run_experiment(cfg);
    EXPECT_EQ(a0, slurp(cfg.output_dir / "seed_0.csv"));
    EXPECT_EQ(a1, slurp(cfg.output_dir / "seed_1.csv"));
    EXPECT_EQ(as, slurp(cfg.output_dir / "summary.csv"));
    EXPECT_FALSE(a0.empty());
    EXPECT_EQ(a0.substr(0, a0.find('\n')), "iteration,mean_extrinsic_return,mean_bonus,max_bonus,realized_kl,wall_clock_s");
  }
}

TEST(RunExperimentTest, StdMatchesRecomputationFromSeedFiles) {
  auto cfg = small("gridworld-sparse", 4, BonusKind::Crl);
  cfg.seeds = {0, 1, 2, 3, 4};
  cfg.iterations = 4;
  cfg.output_dir = scratch("std");
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.failed_seeds(), 0u);
  std::vector<std::vector<std::vector<double>>> files;
  for (int s = 0; s < 5; ++s) files.push_back(read_csv(cfg.output_dir / ("seed_" + std::to_string(s) + ".csv")));
  for (std::size_t it = 0; it < 4; ++it) {
    double m = 0.0;
    for (const auto& f : files) m += f[it][1];
    m /= 5.0;
    double v = 0.0;
    for (const auto& f : files) v += (f[it][1] - m) * (f[it][1] - m);
    const double sd = std::sqrt(v / 5.0);
    EXPECT_NEAR(r.mean_return[it], m, 1e-12);
    EXPECT_NEAR(r.std_return[it], sd, 1e-12);
  }
  const auto summary = read_csv(r.summary_path);
  ASSERT_EQ(summary.size(), 4u);
  for (std::size_t it = 0; it < 4; ++it) EXPECT_NEAR(summary[it][2], r.std_return[it], 1e-12);
}

TEST(RunExperimentTest, FailingSeedIsIsolated) {
  auto cfg = small("chain", 6, BonusKind::None);
  cfg.seeds = {0, 1};
  cfg.output_dir = scratch("fail");
  // Block the second seed's CSV path with a directory.
  fs::create_directories(cfg.output_dir / "seed_1.csv");
  const auto r = run_experiment(cfg);
  ASSERT_EQ(r.curves.size(), 2u);
  EXPECT_FALSE(r.curves[0].failed);
  EXPECT_TRUE(r.curves[1].failed);
  EXPECT_EQ(r.failed_seeds(), 1u);
  EXPECT_EQ(r.mean_return, r.curves[0].returns());
}

TEST(ExperimentConfigTest, Validation) {
  auto c = small("chain", 6, BonusKind::None);
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 10;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small("chain", 6, BonusKind::None);
  c.seeds.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = small("nope", 6, BonusKind::None);
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(default_hidden("mountaincar-sparse"), (std::vector<std::size_t>{32, 32}));
  EXPECT_EQ(bonus_kind_from_string("hash"), BonusKind::Hash);
  EXPECT_THROW(bonus_kind_from_string("rnd"), ConfigError);
}

TEST(MeanStdTest, TruncatesToShortest) {
  std::vector<double> m, s;
  mean_and_std({{1, 2, 3}, {3, 4}}, m, s);
  EXPECT_EQ(m, (std::vector<double>{2, 3}));
  EXPECT_EQ(s, (std::vector<double>{1, 1}));
}
