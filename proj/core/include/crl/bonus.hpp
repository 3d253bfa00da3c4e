#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "crl/clustering.hpp"
#include "crl/types.hpp"

namespace crl::bonus {

/// Per-cluster reward sums and state counts for one batch.
struct ClusterStats {
  std::vector<double> reward_sum;   // R_k
  std::vector<std::size_t> count;   // N_k
  double total_reward = 0.0;        // sum of all rewards in the batch

  std::size_t k() const { return count.size(); }
};

struct CrlBonusConfig {
  double beta = 1.0;
  double eta = 1e-4;
  std::size_t k = 16;

  /// beta >= 0 is accepted so that the beta = 0 ablation is expressible.
  void validate() const;
};

struct HashBonusConfig {
  double beta = 0.01;
  std::size_t code_length = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Counters for conditions that are recorded rather than raised.
struct BonusDiagnostics {
  /// crl_bonus queries that landed in a cluster with N_k = 0.
  std::size_t empty_cluster_queries = 0;
};

/// Tallies R_k and N_k, assigning each state to its nearest center.
/// Accumulates in double precision in input order.
ClusterStats cluster_stats(std::span<const StateVec> states, std::span<const double> rewards,
                           const clustering::ClusterCenters& centers);

/// Same tally from a precomputed assignment.
ClusterStats cluster_stats(std::span<const std::size_t> assignment, std::span<const double> rewards,
                           std::size_t k);

/// Clustered bonus for a state in cluster `cluster`:
///   total_reward > 0: beta * max(eta, R_k) / N_k
///   total_reward = 0: exactly 0
/// A cluster with N_k = 0 yields 0 and bumps `diagnostics`.
double crl_bonus_for_cluster(std::size_t cluster, const ClusterStats& stats, const CrlBonusConfig& cfg,
                             BonusDiagnostics* diagnostics = nullptr);

double crl_bonus(const StateVec& state, const ClusterStats& stats, const clustering::ClusterCenters& centers,
                 const CrlBonusConfig& cfg, BonusDiagnostics* diagnostics = nullptr);

/// Packed sign code; bit j set means code_j = +1.
struct HashKey {
  std::vector<std::uint64_t> words;
  friend bool operator==(const HashKey&, const HashKey&) = default;
};

struct HashKeyHasher {
  std::size_t operator()(const HashKey& key) const noexcept;
};

/// Random-projection sign hash with a Gaussian projection matrix fixed by seed.
class SimHash {
 public:
  SimHash(std::size_t input_dim, std::size_t code_length, std::uint64_t seed);

  std::size_t input_dim() const { return static_cast<std::size_t>(projection_.cols()); }
  std::size_t code_length() const { return static_cast<std::size_t>(projection_.rows()); }
  const Eigen::MatrixXd& projection() const { return projection_; }

  /// code_j = sign(<a_j, state>) in {-1, +1}, with sign(0) = +1.
  std::vector<int> code(const StateVec& state) const;
  HashKey key(const StateVec& state) const;

 private:
  Eigen::MatrixXd projection_;
};

std::vector<int> simhash_code(const StateVec& state, const SimHash& hash);

/// Visit counts per hash code. Persists across the whole training run.
class HashCountTable {
 public:
  std::uint64_t increment(const HashKey& key) { return ++counts_[key]; }
  std::uint64_t count(const HashKey& key) const;
  std::size_t distinct_codes() const { return counts_.size(); }

 private:
  std::unordered_map<HashKey, std::uint64_t, HashKeyHasher> counts_;
};

/// Increments the visit count of the state's code, then returns beta / sqrt(n).
double hash_count_bonus(const StateVec& state, const SimHash& hash, HashCountTable& table,
                        const HashBonusConfig& cfg);

/// Training rewards r_i + b_i. Throws std::invalid_argument on length mismatch.
std::vector<double> augment(std::span<const double> extrinsic, std::span<const double> bonuses);

}  // namespace crl::bonus
