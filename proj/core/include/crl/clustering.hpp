#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "crl/types.hpp"

namespace crl::clustering {

/// K cluster centers, one per row.
///
/// When the fit standardized its inputs, `feature_mean` / `feature_scale` hold
/// the transform and the centers live in standardized coordinates; `assign`
/// applies the same transform to the query. Both are empty for raw fits.
struct ClusterCenters {
  Eigen::MatrixXd centers;
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;

  std::size_t k() const { return static_cast<std::size_t>(centers.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(centers.cols()); }
  bool standardized() const { return feature_scale.size() > 0; }
};

struct KMeansOptions {
  std::size_t k = 16;
  std::uint64_t seed = 0;
  std::size_t max_iters = 50;
  /// Per-feature standardization before clustering. Off by default.
  bool standardize = false;
};

struct KMeansFit {
  ClusterCenters centers;
  /// Final assignment of every input state; consistent with `centers`.
  std::vector<std::size_t> assignment;
  /// Within-cluster sum of squared distances after each assignment pass.
  std::vector<double> objective_history;
  std::size_t requested_k = 0;
  /// min(requested_k, number of distinct states).
  std::size_t effective_k = 0;
  std::size_t lloyd_iterations = 0;
  bool converged = false;
  /// Empty clusters re-seeded to the farthest point during Lloyd updates.
  std::size_t reseeded_clusters = 0;

  bool k_reduced() const { return effective_k < requested_k; }
};

/// k-means++ seeding followed by Lloyd iterations. Deterministic given
/// `options.seed`. Throws std::invalid_argument on empty input, K = 0 or
/// ragged state dimensions.
KMeansFit kmeans_fit(std::span<const StateVec> states, const KMeansOptions& options);

/// Index of the nearest center (Euclidean); ties go to the lowest index.
/// Throws std::invalid_argument on dimension mismatch.
std::size_t assign(const StateVec& state, const ClusterCenters& centers);

std::vector<std::size_t> assign_all(std::span<const StateVec> states, const ClusterCenters& centers);

/// Within-cluster sum of squared distances of `states` under `assignment`,
/// measured in the centers' coordinate system.
double within_cluster_ss(std::span<const StateVec> states, const ClusterCenters& centers,
                         std::span<const std::size_t> assignment);

std::size_t count_distinct(std::span<const StateVec> states);

}  // namespace crl::clustering
