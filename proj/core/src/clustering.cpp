#include "crl/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace crl::clustering {
namespace {

using Matrix = Eigen::MatrixXd;

// Points are stored one per column.
Matrix to_columns(std::span<const StateVec> states) {
  const auto dim = states.front().size();
  Matrix points(dim, static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].size() != dim) throw std::invalid_argument("kmeans_fit: states have differing dimensions");
    points.col(static_cast<Eigen::Index>(i)) = states[i];
  }
  return points;
}

template <typename A, typename B>
double squared_distance(const A& a, const B& b) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return sum;
}

// Nearest row of `centers` (first `k` rows) to `point`; lowest index on ties.
template <typename P>
std::size_t nearest(const P& point, const Matrix& centers, std::size_t k, double* best_out = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(point, centers.row(static_cast<Eigen::Index>(c)));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best_out) *best_out = best_d;
  return best;
}

double assignment_pass(const Matrix& points, const Matrix& centers, std::vector<std::size_t>& assignment) {
  double objective = 0.0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    double d = 0.0;
    assignment[static_cast<std::size_t>(i)] = nearest(points.col(i), centers, static_cast<std::size_t>(centers.rows()), &d);
    objective += d;
  }
  return objective;
}

Matrix kmeans_plus_plus(const Matrix& points, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.cols());
  Matrix centers(static_cast<Eigen::Index>(k), points.rows());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centers.row(0) = points.col(static_cast<Eigen::Index>(pick(rng))).transpose();

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = squared_distance(points.col(static_cast<Eigen::Index>(i)), centers.row(0));
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t chosen = n - 1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double running = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        running += d2[i];
        if (d2[i] > 0.0 && running >= target) {
          chosen = i;
          break;
        }
      }
      // Guard against round-off leaving `target` past the final partial sum.
      while (d2[chosen] == 0.0 && chosen > 0) --chosen;
    }
    centers.row(static_cast<Eigen::Index>(c)) = points.col(static_cast<Eigen::Index>(chosen)).transpose();
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.col(static_cast<Eigen::Index>(i)),
                                               centers.row(static_cast<Eigen::Index>(c))));
    }
  }
  return centers;
}

// Recomputes means; empty clusters move to the point farthest from its own
// center. Returns the number of re-seeded clusters.
std::size_t update_centers(const Matrix& points, Matrix& centers, std::vector<std::size_t>& assignment) {
  const auto k = static_cast<std::size_t>(centers.rows());
  Matrix sums = Matrix::Zero(centers.rows(), centers.cols());
  std::vector<std::size_t> counts(k, 0);
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const auto c = assignment[static_cast<std::size_t>(i)];
    sums.row(static_cast<Eigen::Index>(c)) += points.col(i).transpose();
    ++counts[c];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
    }
  }

  std::size_t reseeded = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    std::size_t far = 0;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
      const auto owner = assignment[static_cast<std::size_t>(i)];
      if (counts[owner] <= 1) continue;  // never strip a cluster of its last point
      const double d = squared_distance(points.col(i), centers.row(static_cast<Eigen::Index>(owner)));
      if (d > far_d) {
        far_d = d;
        far = static_cast<std::size_t>(i);
      }
    }
    if (far_d <= 0.0) continue;
    --counts[assignment[far]];
    assignment[far] = c;
    counts[c] = 1;
    centers.row(static_cast<Eigen::Index>(c)) = points.col(static_cast<Eigen::Index>(far)).transpose();
    ++reseeded;
  }
  return reseeded;
}

}  // namespace

std::size_t count_distinct(std::span<const StateVec> states) {
  if (states.empty()) return 0;
  std::vector<std::size_t> order(states.size());
  std::iota(order.begin(), order.end(), 0);
  const auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(states[a].begin(), states[a].end(), states[b].begin(), states[b].end());
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

KMeansFit kmeans_fit(std::span<const StateVec> states, const KMeansOptions& options) {
  if (states.empty()) throw std::invalid_argument("kmeans_fit: empty input");
  if (options.k == 0) throw std::invalid_argument("kmeans_fit: K must be >= 1");
  if (options.max_iters == 0) throw std::invalid_argument("kmeans_fit: max_iters must be >= 1");

  KMeansFit fit;
  fit.requested_k = options.k;
  fit.effective_k = std::min(options.k, count_distinct(states));

  Matrix points = to_columns(states);
  if (options.standardize) {
    fit.centers.feature_mean = points.rowwise().mean();
    Eigen::VectorXd scale(points.rows());
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
      const double var = (points.row(j).array() - fit.centers.feature_mean[j]).square().mean();
      scale[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    fit.centers.feature_scale = scale;
    points = (points.colwise() - fit.centers.feature_mean).array().colwise() / scale.array();
  }

  Rng rng(options.seed);
  Matrix centers = kmeans_plus_plus(points, fit.effective_k, rng);

  fit.assignment.assign(states.size(), 0);
  fit.objective_history.push_back(assignment_pass(points, centers, fit.assignment));
  std::vector<std::size_t> next(states.size(), 0);
  for (std::size_t it = 0; it < options.max_iters; ++it) {
    fit.reseeded_clusters += update_centers(points, centers, fit.assignment);
    fit.objective_history.push_back(assignment_pass(points, centers, next));
    ++fit.lloyd_iterations;
    const bool unchanged = next == fit.assignment;
    fit.assignment.swap(next);
    if (unchanged) {
      fit.converged = true;
      break;
    }
  }
  fit.centers.centers = std::move(centers);
  return fit;
}

std::size_t assign(const StateVec& state, const ClusterCenters& centers) {
  if (static_cast<std::size_t>(state.size()) != centers.dim()) {
    throw std::invalid_argument("assign: state dimension does not match centers");
  }
  if (centers.k() == 0) throw std::invalid_argument("assign: no centers");
  if (centers.standardized()) {
    const Eigen::VectorXd z = (state - centers.feature_mean).cwiseQuotient(centers.feature_scale);
    return nearest(z, centers.centers, centers.k());
  }
  return nearest(state, centers.centers, centers.k());
}

std::vector<std::size_t> assign_all(std::span<const StateVec> states, const ClusterCenters& centers) {
  std::vector<std::size_t> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(assign(s, centers));
  return out;
}

double within_cluster_ss(std::span<const StateVec> states, const ClusterCenters& centers,
                         std::span<const std::size_t> assignment) {
  if (states.size() != assignment.size()) throw std::invalid_argument("within_cluster_ss: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto row = centers.centers.row(static_cast<Eigen::Index>(assignment[i]));
    if (centers.standardized()) {
      const Eigen::VectorXd z = (states[i] - centers.feature_mean).cwiseQuotient(centers.feature_scale);
      total += squared_distance(z, row);
    } else {
      total += squared_distance(states[i], row);
    }
  }
  return total;
}

}  // namespace crl::clustering
