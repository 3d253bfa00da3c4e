#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "crl/types.hpp"

namespace crl::envs {

/// Continuous actions carry per-dimension bounds; discrete actions a count.
struct ActionSpec {
  ActionKind kind = ActionKind::Discrete;
  std::size_t count = 0;
  Eigen::VectorXd low;
  Eigen::VectorXd high;

  static ActionSpec discrete(std::size_t count);
  static ActionSpec continuous(Eigen::VectorXd low, Eigen::VectorXd high);

  /// Policy output dimension: the action dimension for continuous, the count for discrete.
  std::size_t output_dim() const;
  void validate() const;
};

struct EnvConfig {
  std::string id;
  /// Episode horizon; the environment default is used when unset.
  std::optional<std::size_t> horizon;
  std::uint64_t seed = 0;
  /// Chain length or grid side; the environment default is used when unset.
  std::optional<std::size_t> size;
  /// MountainCar engine power; MountainCarParams default when unset.
  std::optional<double> power;
};

struct StepResult {
  StateVec next_state;
  double reward = 0.0;
  bool done = false;
  /// True when the episode ended by reaching the goal (not by the horizon).
  bool goal_reached = false;
  /// True when a continuous action was outside its bounds and got clipped.
  bool clipped = false;
};

/// Episodic environment with a sparse, non-negative reward.
///
/// The base class owns the episode clock and the reset stream: `reset()` draws
/// the next initial state from an engine seeded at construction, so the
/// sequence of initial states is reproducible under a fixed seed.
class Env {
 public:
  Env(std::size_t observation_dim, ActionSpec spec, std::size_t horizon, std::uint64_t seed);
  virtual ~Env() = default;

  Env(const Env&) = default;
  Env& operator=(const Env&) = default;
  Env(Env&&) noexcept = default;
  Env& operator=(Env&&) noexcept = default;

  virtual std::string id() const = 0;

  std::size_t observation_dim() const { return observation_dim_; }
  const ActionSpec& action_spec() const { return spec_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t elapsed() const { return elapsed_; }
  bool done() const { return done_; }

  StateVec reset();
  /// Reseeds the reset stream, then resets.
  StateVec reset(std::uint64_t seed);

  /// Throws std::logic_error if the episode already terminated, and
  /// std::out_of_range for a discrete index outside the action set.
  StepResult step(const Action& action);

  /// Number of continuous actions clipped since construction.
  std::size_t clipped_actions() const { return clipped_count_; }

 protected:
  struct Transition {
    StateVec observation;
    double reward = 0.0;
    bool terminal = false;
  };

  virtual StateVec do_reset(Rng& rng) = 0;
  virtual Transition do_step(const Action& action) = 0;

 private:
  std::size_t observation_dim_;
  ActionSpec spec_;
  std::size_t horizon_;
  Rng rng_;
  std::size_t elapsed_ = 0;
  bool done_ = true;
  std::size_t clipped_count_ = 0;
};

/// Parameters of the sparse MountainCar variant.
struct MountainCarParams {
  double min_position = -1.2;
  double max_position = 0.6;
  double max_speed = 0.07;
  double goal_position = 0.6;
  /// Force multiplier. 0.0025 lets a full-throttle push from the start basin
  /// escape the valley, so the task is solvable within a 30-iteration budget.
  double power = 0.0025;
  double gravity = 0.0025;
  double goal_reward = 1.0;
  double step_reward = 0.001;
};

/// Classic mountain-car dynamics with a 3-dim observation
/// (position, sin(3 * position), velocity) and a 1-dim force in [-1, 1].
/// Reward is +1 on the step that reaches the right edge, +0.001 otherwise.
class MountainCar final : public Env {
 public:
  explicit MountainCar(std::size_t horizon = 500, std::uint64_t seed = 0,
                       MountainCarParams params = {});

  std::string id() const override { return "mountaincar-sparse"; }
  const MountainCarParams& params() const { return params_; }
  double position() const { return position_; }
  double velocity() const { return velocity_; }

 protected:
  StateVec do_reset(Rng& rng) override;
  Transition do_step(const Action& action) override;

 private:
  StateVec observe() const;

  MountainCarParams params_;
  double position_ = 0.0;
  double velocity_ = 0.0;
};

/// Chain of n states with one-hot observations. Start at 0; action 0 moves
/// left, action 1 moves right. Reaching state n-1 pays 1 and ends the episode.
class Chain final : public Env {
 public:
  explicit Chain(std::size_t length = 10, std::size_t horizon = 100, std::uint64_t seed = 0);

  std::string id() const override { return "chain"; }
  std::size_t position() const { return position_; }

 protected:
  StateVec do_reset(Rng& rng) override;
  Transition do_step(const Action& action) override;

 private:
  std::size_t length_;
  std::size_t position_ = 0;
};

/// side x side grid with one-hot observations, start in the top-left corner and
/// a reward of 1 in the opposite corner. Actions: up, down, left, right; moves
/// into a wall leave the agent in place.
class Gridworld final : public Env {
 public:
  enum Move : std::size_t { Up = 0, Down = 1, Left = 2, Right = 3 };

  explicit Gridworld(std::size_t side = 11, std::size_t horizon = 100, std::uint64_t seed = 0);

  std::string id() const override { return "gridworld-sparse"; }
  std::size_t side() const { return side_; }
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 protected:
  StateVec do_reset(Rng& rng) override;
  Transition do_step(const Action& action) override;

 private:
  StateVec observe() const;

  std::size_t side_;
  std::size_t row_ = 0;
  std::size_t col_ = 0;
};

std::size_t default_horizon(const std::string& id);

/// Throws ConfigError for an unknown id or invalid size/horizon.
std::unique_ptr<Env> make_env(const EnvConfig& config);

}  // namespace crl::envs
