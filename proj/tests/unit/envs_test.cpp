#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crl/envs.hpp"

using namespace crl;
using namespace crl::envs;

namespace {

Action push(double f) { return Action::continuous(Eigen::VectorXd::Constant(1, f)); }

}  // namespace

TEST(MountainCarTest, ResetStartsAtRestInBasin) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    MountainCar env(500, seed);
    const auto s = env.reset();
    ASSERT_EQ(s.size(), 3);
    EXPECT_GE(s[0], -0.6);
    EXPECT_LE(s[0], -0.4);
    EXPECT_DOUBLE_EQ(s[1], std::sin(3.0 * s[0]));
    EXPECT_EQ(s[2], 0.0);
  }
}

TEST(MountainCarTest, NonGoalStepPaysSmallReward) {
  MountainCar env(500, 1);
  env.reset();
  const auto r = env.step(push(0.3));
  EXPECT_EQ(r.reward, 0.001);
  EXPECT_FALSE(r.done);
  EXPECT_FALSE(r.goal_reached);
}

TEST(MountainCarTest, GoalCrossingPaysOneAndTerminates) {
  MountainCar env(1000, 3);
  env.reset();
  // Bang-bang on the sign of velocity pumps energy until the car escapes.
  StepResult r;
  double total = 0.0;
  std::size_t steps = 0;
  do {
    r = env.step(push(env.velocity() >= 0.0 ? 1.0 : -1.0));
    total += r.reward;
    ++steps;
  } while (!r.done);
  EXPECT_TRUE(r.goal_reached);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_NEAR(total, 1.0 + 0.001 * static_cast<double>(steps - 1), 1e-12);
  EXPECT_GE(env.position(), 0.6);
}

TEST(MountainCarTest, OutOfBoundsActionIsClippedAndRecorded) {
  MountainCar a(500, 4), b(500, 4);
  a.reset();
  b.reset();
  const auto ra = a.step(push(7.5));
  const auto rb = b.step(push(1.0));
  EXPECT_TRUE(ra.clipped);
  EXPECT_FALSE(rb.clipped);
  EXPECT_EQ(a.clipped_actions(), 1u);
  EXPECT_EQ(ra.next_state, rb.next_state);
}

TEST(MountainCarTest, StateStaysWithinClassicBounds) {
  MountainCar env(500, 9);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int ep = 0; ep < 20; ++ep) {
    env.reset();
    while (!env.done()) {
      const auto r = env.step(push(u(rng)));
      EXPECT_GE(env.position(), -1.2);
      EXPECT_LE(env.position(), 0.6);
      EXPECT_LE(std::abs(env.velocity()), 0.07);
      EXPECT_GE(r.reward, 0.0);
      EXPECT_TRUE(r.next_state.allFinite());
    }
    EXPECT_LE(env.elapsed(), env.horizon());
  }
}

TEST(ChainTest, ResetIsOneHotAtZero) {
  Chain env(10);
  const auto s = env.reset();
  ASSERT_EQ(s.size(), 10);
  EXPECT_EQ(s[0], 1.0);
  EXPECT_EQ(s.sum(), 1.0);
}

TEST(ChainTest, NonTerminalStepsPayNothing) {
  Chain env(10);
  env.reset();
  for (int i = 0; i < 5; ++i) {
    const auto r = env.step(Action::discrete(i % 2));
    EXPECT_EQ(r.reward, 0.0);
  }
}

TEST(ChainTest, WalkingRightReachesGoal) {
  Chain env(6, 100);
  env.reset();
  StepResult r;
  for (int i = 0; i < 5; ++i) r = env.step(Action::discrete(1));
  EXPECT_TRUE(r.done);
  EXPECT_TRUE(r.goal_reached);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_THROW(env.step(Action::discrete(1)), std::logic_error);
}

TEST(ChainTest, InvalidDiscreteIndexThrows) {
  Chain env(4);
  env.reset();
  EXPECT_THROW(env.step(Action::discrete(2)), std::out_of_range);
}

TEST(ChainTest, HorizonEndsEpisodeWithoutGoal) {
  Chain env(10, 7);
  env.reset();
  StepResult r;
  std::size_t n = 0;
  while (!env.done()) {
    r = env.step(Action::discrete(0));
    ++n;
  }
  EXPECT_EQ(n, 7u);
  EXPECT_FALSE(r.goal_reached);
}

TEST(GridworldTest, ResetDeterministicUnderSeed) {
  Gridworld a(5, 100, 7), b(5, 100, 7);
  EXPECT_EQ(a.reset(7), b.reset(7));
  EXPECT_EQ(a.reset(7), a.reset(7));
}

TEST(GridworldTest, WallsAndGoal) {
  Gridworld env(3);
  env.reset();
  auto r = env.step(Action::discrete(Gridworld::Up));
  EXPECT_EQ(env.row(), 0u);
  EXPECT_EQ(env.col(), 0u);
  EXPECT_EQ(r.reward, 0.0);
  env.step(Action::discrete(Gridworld::Right));
  env.step(Action::discrete(Gridworld::Right));
  env.step(Action::discrete(Gridworld::Down));
  r = env.step(Action::discrete(Gridworld::Down));
  EXPECT_TRUE(r.goal_reached);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_EQ(r.next_state[8], 1.0);
}

TEST(EnvTest, SameSeedSameActionsSameTrajectory) {
  for (const std::string id : {"mountaincar-sparse", "chain", "gridworld-sparse"}) {
    auto a = make_env({id, 200, 11, {}, {}});
    auto b = make_env({id, 200, 11, {}, {}});
    std::mt19937_64 rng(3);
    a->reset();
    b->reset();
    while (!a->done()) {
      Action act = a->action_spec().kind == ActionKind::Discrete
                       ? Action::discrete(rng() % a->action_spec().count)
                       : Action::continuous(Eigen::VectorXd::Constant(1, static_cast<double>(rng() % 200) / 100.0 - 1.0));
      const auto ra = a->step(act);
      const auto rb = b->step(act);
      ASSERT_EQ(ra.next_state, rb.next_state) << id;
      ASSERT_EQ(ra.reward, rb.reward) << id;
      ASSERT_EQ(ra.done, rb.done) << id;
    }
  }
}

TEST(MakeEnvTest, DimensionsAndActionSpecs) {
  auto mc = make_env({"mountaincar-sparse", {}, 0, {}, {}});
  EXPECT_EQ(mc->observation_dim(), 3u);
  EXPECT_EQ(mc->action_spec().kind, ActionKind::Continuous);
  EXPECT_EQ(mc->action_spec().output_dim(), 1u);
  EXPECT_EQ(mc->horizon(), 500u);

  auto chain = make_env({"chain", {}, 0, 20, {}});
  EXPECT_EQ(chain->observation_dim(), 20u);
  EXPECT_EQ(chain->action_spec().count, 2u);
  EXPECT_EQ(chain->horizon(), 100u);

  auto grid = make_env({"gridworld-sparse", {}, 0, 11, {}});
  EXPECT_EQ(grid->observation_dim(), 121u);
  EXPECT_EQ(grid->action_spec().count, 4u);
}

TEST(MakeEnvTest, Errors) {
  EXPECT_THROW(make_env({"pong", {}, 0, {}, {}}), ConfigError);
  EXPECT_THROW(make_env({"chain", 0, 0, {}, {}}), ConfigError);
  EXPECT_THROW(make_env({"chain", {}, 0, {}, 0.002}), ConfigError);
  EXPECT_THROW(make_env({"mountaincar-sparse", {}, 0, {}, -1.0}), ConfigError);
}

TEST(MakeEnvTest, PowerOverride) {
  auto env = make_env({"mountaincar-sparse", {}, 0, {}, 0.0015});
  EXPECT_EQ(dynamic_cast<MountainCar&>(*env).params().power, 0.0015);
}
