#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace crl {

/// Observation vector. Dimension is fixed for the lifetime of an environment.
using StateVec = Eigen::VectorXd;

/// All stochastic components draw from this engine so runs are bit-reproducible
/// on a given platform.
using Rng = std::mt19937_64;

/// Raised for invalid user-facing configuration (unknown ids, bad ranges,
/// schema violations). The CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

enum class ActionKind { Discrete, Continuous };

struct Action {
  ActionKind kind = ActionKind::Discrete;
  std::size_t index = 0;   // discrete
  Eigen::VectorXd values;  // continuous

  static Action discrete(std::size_t i) { return Action{ActionKind::Discrete, i, {}}; }
  static Action continuous(Eigen::VectorXd v) {
    return Action{ActionKind::Continuous, 0, std::move(v)};
  }
};

/// One (state, action, extrinsic reward) tuple collected under the current policy.
struct Sample {
  StateVec state;
  Action action;
  double reward = 0.0;
};

/// Derives an independent 64-bit seed for a named sub-stream (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace crl
