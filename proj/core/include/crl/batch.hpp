#pragma once

#include <cstddef>
#include <vector>

#include "crl/types.hpp"

namespace crl {

/// Half-open step range [begin, end) of one episode inside a batch.
struct EpisodeSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  /// False when the step budget cut the episode short. Horizon-limited
  /// episodes count as complete.
  bool complete = true;
  bool goal_reached = false;

  std::size_t length() const { return end - begin; }
};

/// Steps collected under one policy, stored column-wise.
///
/// `training_rewards` = `extrinsic_rewards` + `bonuses`; the extrinsic
/// column is never modified after collection so evaluation stays bonus-free.
struct TrajectoryBatch {
  std::vector<StateVec> states;
  std::vector<Action> actions;
  std::vector<double> log_probs;
  std::vector<double> extrinsic_rewards;
  std::vector<double> bonuses;
  std::vector<double> training_rewards;
  std::vector<std::size_t> time_steps;
  std::vector<EpisodeSpan> episodes;
  std::size_t horizon = 1;

  std::size_t size() const { return states.size(); }

  /// Sum of extrinsic rewards per episode.
  std::vector<double> episode_returns() const;
  /// Mean extrinsic return over complete episodes (0 if there are none).
  double mean_complete_return() const;
  std::size_t complete_episodes() const;
};

}  // namespace crl
