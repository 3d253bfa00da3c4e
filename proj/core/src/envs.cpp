#include "crl/envs.hpp"

#include <algorithm>
#include <cmath>

namespace crl {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace crl

namespace crl::envs {

ActionSpec ActionSpec::discrete(std::size_t count) {
  ActionSpec spec;
  spec.kind = ActionKind::Discrete;
  spec.count = count;
  spec.validate();
  return spec;
}

ActionSpec ActionSpec::continuous(Eigen::VectorXd low, Eigen::VectorXd high) {
  ActionSpec spec;
  spec.kind = ActionKind::Continuous;
  spec.low = std::move(low);
  spec.high = std::move(high);
  spec.validate();
  return spec;
}

std::size_t ActionSpec::output_dim() const {
  return kind == ActionKind::Discrete ? count : static_cast<std::size_t>(low.size());
}

void ActionSpec::validate() const {
  if (kind == ActionKind::Discrete) {
    if (count < 2) throw std::invalid_argument("discrete action spec needs at least 2 actions");
    return;
  }
  if (low.size() == 0 || low.size() != high.size()) {
    throw std::invalid_argument("continuous action bounds must be non-empty and equal length");
  }
  for (Eigen::Index i = 0; i < low.size(); ++i) {
    if (!std::isfinite(low[i]) || !std::isfinite(high[i]) || !(low[i] < high[i])) {
      throw std::invalid_argument("continuous action bounds must be finite with low < high");
    }
  }
}

Env::Env(std::size_t observation_dim, ActionSpec spec, std::size_t horizon, std::uint64_t seed)
    : observation_dim_(observation_dim), spec_(std::move(spec)), horizon_(horizon), rng_(seed) {
  if (horizon_ < 1) throw ConfigError("horizon must be >= 1");
  spec_.validate();
}

StateVec Env::reset() {
  elapsed_ = 0;
  done_ = false;
  return do_reset(rng_);
}

StateVec Env::reset(std::uint64_t seed) {
  rng_.seed(seed);
  return reset();
}

StepResult Env::step(const Action& action) {
  if (done_) throw std::logic_error("step() called on a terminated episode; call reset()");
  if (action.kind != spec_.kind) throw std::invalid_argument("action kind does not match action spec");

  StepResult result;
  Transition transition;
  if (spec_.kind == ActionKind::Discrete) {
    if (action.index >= spec_.count) throw std::out_of_range("discrete action index out of range");
    transition = do_step(action);
  } else {
    if (action.values.size() != spec_.low.size()) {
      throw std::invalid_argument("continuous action has wrong dimension");
    }
    Action clipped = Action::continuous(action.values.cwiseMax(spec_.low).cwiseMin(spec_.high));
    result.clipped = !clipped.values.cwiseEqual(action.values).all();
    if (result.clipped) ++clipped_count_;
    transition = do_step(clipped);
  }

  ++elapsed_;
  result.next_state = std::move(transition.observation);
  result.reward = transition.reward;
  result.goal_reached = transition.terminal;
  result.done = transition.terminal || elapsed_ >= horizon_;
  done_ = result.done;
  return result;
}

// MountainCar ---------------------------------------------------------------

MountainCar::MountainCar(std::size_t horizon, std::uint64_t seed, MountainCarParams params)
    : Env(3, ActionSpec::continuous(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)),
          horizon, seed),
      params_(params) {}

StateVec MountainCar::observe() const {
  StateVec obs(3);
  obs << position_, std::sin(3.0 * position_), velocity_;
  return obs;
}

StateVec MountainCar::do_reset(Rng& rng) {
  std::uniform_real_distribution<double> start(-0.6, -0.4);
  position_ = start(rng);
  velocity_ = 0.0;
  return observe();
}

MountainCar::Transition MountainCar::do_step(const Action& action) {
  const double force = action.values[0];
  velocity_ += force * params_.power - params_.gravity * std::cos(3.0 * position_);
  velocity_ = std::clamp(velocity_, -params_.max_speed, params_.max_speed);
  position_ += velocity_;
  position_ = std::clamp(position_, params_.min_position, params_.max_position);
  if (position_ <= params_.min_position && velocity_ < 0.0) velocity_ = 0.0;

  const bool goal = position_ >= params_.goal_position;
  return {observe(), goal ? params_.goal_reward : params_.step_reward, goal};
}

// Chain ----------------------------------------------------------------------

Chain::Chain(std::size_t length, std::size_t horizon, std::uint64_t seed)
    : Env(length, ActionSpec::discrete(2), horizon, seed), length_(length) {
  if (length_ < 2) throw ConfigError("chain length must be >= 2");
}

StateVec Chain::do_reset(Rng&) {
  position_ = 0;
  StateVec obs = StateVec::Zero(static_cast<Eigen::Index>(length_));
  obs[0] = 1.0;
  return obs;
}

Chain::Transition Chain::do_step(const Action& action) {
  if (action.index == 1) {
    ++position_;
  } else if (position_ > 0) {
    --position_;
  }
  StateVec obs = StateVec::Zero(static_cast<Eigen::Index>(length_));
  obs[static_cast<Eigen::Index>(position_)] = 1.0;
  const bool goal = position_ + 1 == length_;
  return {std::move(obs), goal ? 1.0 : 0.0, goal};
}

// Gridworld ------------------------------------------------------------------

Gridworld::Gridworld(std::size_t side, std::size_t horizon, std::uint64_t seed)
    : Env(side * side, ActionSpec::discrete(4), horizon, seed), side_(side) {
  if (side_ < 2) throw ConfigError("gridworld side must be >= 2");
}

StateVec Gridworld::observe() const {
  StateVec obs = StateVec::Zero(static_cast<Eigen::Index>(side_ * side_));
  obs[static_cast<Eigen::Index>(row_ * side_ + col_)] = 1.0;
  return obs;
}

StateVec Gridworld::do_reset(Rng&) {
  row_ = 0;
  col_ = 0;
  return observe();
}

Gridworld::Transition Gridworld::do_step(const Action& action) {
  switch (action.index) {
    case Up:
      if (row_ > 0) --row_;
      break;
    case Down:
      if (row_ + 1 < side_) ++row_;
      break;
    case Left:
      if (col_ > 0) --col_;
      break;
    default:
      if (col_ + 1 < side_) ++col_;
      break;
  }
  const bool goal = row_ + 1 == side_ && col_ + 1 == side_;
  return {observe(), goal ? 1.0 : 0.0, goal};
}

// Factory ----------------------------------------------------------------------

std::size_t default_horizon(const std::string& id) {
  if (id == "mountaincar-sparse") return 500;
  if (id == "chain" || id == "gridworld-sparse") return 100;
  throw ConfigError("env.id: unknown environment '" + id + "'");
}

std::unique_ptr<Env> make_env(const EnvConfig& config) {
  const std::size_t horizon = config.horizon.value_or(default_horizon(config.id));
  if (horizon < 1) throw ConfigError("env.horizon must be >= 1");
  if (config.id == "mountaincar-sparse") {
    MountainCarParams params;
    if (config.power) {
      if (!(*config.power > 0.0) || !std::isfinite(*config.power)) throw ConfigError("env.power must be > 0");
      params.power = *config.power;
    }
    return std::make_unique<MountainCar>(horizon, config.seed, params);
  }
  if (config.power) throw ConfigError("env.power applies to mountaincar-sparse only");
  if (config.id == "chain") {
    return std::make_unique<Chain>(config.size.value_or(10), horizon, config.seed);
  }
  if (config.id == "gridworld-sparse") {
    return std::make_unique<Gridworld>(config.size.value_or(11), horizon, config.seed);
  }
  throw ConfigError("env.id: unknown environment '" + config.id + "'");
}

}  // namespace crl::envs
