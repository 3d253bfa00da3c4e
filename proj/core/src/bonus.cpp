#include "crl/bonus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crl::bonus {

void CrlBonusConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("bonus.crl.beta must be finite and >= 0");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("bonus.crl.eta must be finite and >= 0");
  if (k < 1) throw ConfigError("bonus.crl.clusters must be >= 1");
}

void HashBonusConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("bonus.hash.beta must be finite and >= 0");
  if (code_length < 1) throw ConfigError("bonus.hash.code_length must be >= 1");
}

ClusterStats cluster_stats(std::span<const std::size_t> assignment, std::span<const double> rewards,
                           std::size_t k) {
  if (assignment.size() != rewards.size()) throw std::invalid_argument("cluster_stats: length mismatch");
  if (assignment.empty()) throw std::invalid_argument("cluster_stats: empty batch");
  ClusterStats stats;
  stats.reward_sum.assign(k, 0.0);
  stats.count.assign(k, 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto c = assignment[i];
    if (c >= k) throw std::out_of_range("cluster_stats: cluster index out of range");
    stats.reward_sum[c] += rewards[i];
    ++stats.count[c];
    stats.total_reward += rewards[i];
  }
  return stats;
}

ClusterStats cluster_stats(std::span<const StateVec> states, std::span<const double> rewards,
                           const clustering::ClusterCenters& centers) {
  if (states.size() != rewards.size()) throw std::invalid_argument("cluster_stats: length mismatch");
  const auto assignment = clustering::assign_all(states, centers);
  return cluster_stats(assignment, rewards, centers.k());
}

double crl_bonus_for_cluster(std::size_t cluster, const ClusterStats& stats, const CrlBonusConfig& cfg,
                             BonusDiagnostics* diagnostics) {
  if (cluster >= stats.k()) throw std::out_of_range("crl_bonus: cluster index out of range");
  if (!(stats.total_reward > 0.0)) return 0.0;
  const auto n = stats.count[cluster];
  if (n == 0) {
    if (diagnostics) ++diagnostics->empty_cluster_queries;
    return 0.0;
  }
  return cfg.beta * std::max(cfg.eta, stats.reward_sum[cluster]) / static_cast<double>(n);
}

double crl_bonus(const StateVec& state, const ClusterStats& stats, const clustering::ClusterCenters& centers,
                 const CrlBonusConfig& cfg, BonusDiagnostics* diagnostics) {
  return crl_bonus_for_cluster(clustering::assign(state, centers), stats, cfg, diagnostics);
}

std::size_t HashKeyHasher::operator()(const HashKey& key) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (const auto w : key.words) {
    h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

SimHash::SimHash(std::size_t input_dim, std::size_t code_length, std::uint64_t seed) {
  if (code_length < 1) throw std::invalid_argument("SimHash: code length must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  projection_.resize(static_cast<Eigen::Index>(code_length), static_cast<Eigen::Index>(input_dim));
  for (Eigen::Index r = 0; r < projection_.rows(); ++r) {
    for (Eigen::Index c = 0; c < projection_.cols(); ++c) projection_(r, c) = normal(rng);
  }
}

std::vector<int> SimHash::code(const StateVec& state) const {
  if (state.size() != projection_.cols()) throw std::invalid_argument("SimHash: state dimension mismatch");
  const Eigen::VectorXd proj = projection_ * state;
  std::vector<int> out(static_cast<std::size_t>(proj.size()));
  for (Eigen::Index j = 0; j < proj.size(); ++j) out[static_cast<std::size_t>(j)] = proj[j] >= 0.0 ? 1 : -1;
  return out;
}

HashKey SimHash::key(const StateVec& state) const {
  const auto bits = code(state);
  HashKey key;
  key.words.assign((bits.size() + 63) / 64, 0);
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] > 0) key.words[j / 64] |= std::uint64_t{1} << (j % 64);
  }
  return key;
}

std::vector<int> simhash_code(const StateVec& state, const SimHash& hash) { return hash.code(state); }

std::uint64_t HashCountTable::count(const HashKey& key) const {
  const auto it = counts_.find(key);
  return it == counts_.end() ? 0 : it->second;
}

double hash_count_bonus(const StateVec& state, const SimHash& hash, HashCountTable& table,
                        const HashBonusConfig& cfg) {
  const auto n = table.increment(hash.key(state));
  return cfg.beta / std::sqrt(static_cast<double>(n));
}

std::vector<double> augment(std::span<const double> extrinsic, std::span<const double> bonuses) {
  if (extrinsic.size() != bonuses.size()) throw std::invalid_argument("augment: length mismatch");
  std::vector<double> training(extrinsic.size());
  for (std::size_t i = 0; i < extrinsic.size(); ++i) training[i] = extrinsic[i] + bonuses[i];
  return training;
}

}  // namespace crl::bonus
