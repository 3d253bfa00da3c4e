#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "crl/policy.hpp"

using namespace crl;
using namespace crl::policy;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Eigen::MatrixXd::NullaryExpr(r, c, [&] { return g(rng); });
}

}  // namespace

TEST(MlpTest, ParameterCount) {
  MlpArchitecture a{3, {32, 32}, 1, Activation::Tanh};
  EXPECT_EQ(a.parameter_count(), 3u * 32 + 32 + 32 * 32 + 32 + 32 + 1);
  MlpArchitecture bias_only{0, {}, 2, Activation::Tanh};
  EXPECT_EQ(bias_only.parameter_count(), 2u);
}

TEST(MlpTest, BackwardAndJvpMatchFiniteDifferences) {
  std::mt19937_64 rng(1);
  for (auto act : {Activation::Tanh, Activation::Relu}) {
    Mlp net({4, {5, 3}, 2, act});
    // Random biases keep relu pre-activations off the kink at exactly 0.
    const Eigen::VectorXd p = net.initial_parameters(rng, 1.0) + 0.5 * random_matrix(
                                  static_cast<Eigen::Index>(net.parameter_count()), 1, rng);
    const Eigen::MatrixXd x = random_matrix(4, 7, rng);
    const Eigen::MatrixXd w = random_matrix(2, 7, rng);
    Mlp::Cache cache;
    net.forward(p, x, &cache);
    const Eigen::VectorXd grad = net.backward(p, cache, w);
    const Eigen::VectorXd dir = random_matrix(p.size(), 1, rng);
    const Eigen::MatrixXd jv = net.jvp(p, cache, dir);
    const double h = 1e-6;
    Eigen::MatrixXd fd = (net.forward(p + h * dir, x) - net.forward(p - h * dir, x)) / (2 * h);
    EXPECT_LT((jv - fd).norm(), 1e-6 * (1.0 + fd.norm())) << to_string(act);
    const double fd_dir = (fd.cwiseProduct(w)).sum();
    EXPECT_NEAR(grad.dot(dir), fd_dir, 1e-6 * (1.0 + std::abs(fd_dir)));
  }
}

TEST(MlpTest, ActivationNames) {
  EXPECT_EQ(activation_from_string("tanh"), Activation::Tanh);
  EXPECT_EQ(activation_from_string(to_string(Activation::Relu)), Activation::Relu);
  EXPECT_THROW(activation_from_string("gelu"), ConfigError);
}

TEST(PolicyTest, NearDeterministicSoftmax) {
  Rng init(0);
  StochasticPolicy pi({0, {}, 3, Activation::Tanh}, DistributionFamily::Categorical, init);
  pi.set_parameters(Eigen::Vector3d(1000.0, 0.0, 0.0));
  Rng rng(1);
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) zeros += pi.sample_action(StateVec(0), rng).action.index == 0;
  EXPECT_GT(zeros / 10000.0, 0.99);
}

TEST(PolicyTest, DegenerateGaussianReturnsMean) {
  Rng init(0);
  StochasticPolicy pi({0, {}, 1, Activation::Tanh}, DistributionFamily::Gaussian, init);
  pi.set_parameters(Eigen::Vector2d(0.37, std::log(1e-6)));
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto s = pi.sample_action(StateVec(0), rng);
    EXPECT_NEAR(s.action.values[0], 0.37, 1e-4);
  }
}

TEST(PolicyTest, SamplingDeterministicAndLogProbConsistent) {
  Rng init(3);
  auto pi = StochasticPolicy::for_action_spec(3, envs::ActionSpec::continuous(Eigen::VectorXd::Constant(1, -1),
                                                                              Eigen::VectorXd::Constant(1, 1)),
                                              {8}, init);
  EXPECT_EQ(pi.family(), DistributionFamily::Gaussian);
  StateVec s(3);
  s << 0.1, -0.2, 0.3;
  Rng a(9), b(9);
  const auto x = pi.sample_action(s, a);
  const auto y = pi.sample_action(s, b);
  EXPECT_EQ(x.action.values, y.action.values);
  EXPECT_EQ(x.log_prob, y.log_prob);
  EXPECT_NEAR(pi.log_prob(s, x.action), x.log_prob, 1e-12);

  // Unit-variance Gaussian density at init (log-std 0).
  const Eigen::MatrixXd mean = pi.network().forward(pi.parameters().head(static_cast<Eigen::Index>(pi.network().parameter_count())), s);
  const double z = x.action.values[0] - mean(0, 0);
  EXPECT_NEAR(x.log_prob, -0.5 * z * z - 0.5 * std::log(2 * M_PI), 1e-12);
}

TEST(PolicyTest, CategoricalLogProbIsLogSoftmax) {
  Rng init(4);
  auto pi = StochasticPolicy::for_action_spec(2, envs::ActionSpec::discrete(4), {6}, init);
  EXPECT_EQ(pi.family(), DistributionFamily::Categorical);
  StateVec s(2);
  s << 1.0, -1.0;
  const Eigen::VectorXd logits =
      pi.network().forward(pi.parameters(), s).col(0);
  const double lse = std::log(logits.array().exp().sum());
  for (std::size_t k = 0; k < 4; ++k)
    EXPECT_NEAR(pi.log_prob(s, Action::discrete(k)), logits[static_cast<Eigen::Index>(k)] - lse, 1e-12);
}

TEST(PolicyTest, RejectsNonFiniteParameters) {
  Rng init(0);
  StochasticPolicy pi({0, {}, 1, Activation::Tanh}, DistributionFamily::Gaussian, init);
  EXPECT_THROW(pi.set_parameters(Eigen::Vector2d(0.0, NAN)), std::invalid_argument);
  EXPECT_THROW(pi.set_parameters(Eigen::Vector3d(0.0, 0.0, 0.0)), std::invalid_argument);
}

TEST(PolicyTest, SnapshotRoundTrip) {
  Rng init(5);
  auto pi = StochasticPolicy::for_action_spec(4, envs::ActionSpec::discrete(2), {3}, init);
  StochasticPolicy copy(pi.snapshot());
  EXPECT_EQ(copy.parameters(), pi.parameters());
  EXPECT_EQ(copy.snapshot().architecture, pi.snapshot().architecture);
}

TEST(PolicyTest, FisherIsSymmetricAndMatchesKlHessian) {
  std::mt19937_64 rng(6);
  for (auto family : {DistributionFamily::Gaussian, DistributionFamily::Categorical}) {
    Rng init(7);
    StochasticPolicy pi({3, {5}, 3, Activation::Tanh}, family, init);
    Eigen::VectorXd theta = pi.parameters() + 0.3 * random_matrix(pi.parameters().size(), 1, rng);
    const Eigen::MatrixXd states = random_matrix(3, 40, rng);
    const auto dist = pi.evaluate(theta, states);
    for (int t = 0; t < 10; ++t) {
      const Eigen::VectorXd u = random_matrix(theta.size(), 1, rng);
      const Eigen::VectorXd v = random_matrix(theta.size(), 1, rng);
      const double a = u.dot(pi.fisher_vector_product(theta, dist, v));
      const double b = v.dot(pi.fisher_vector_product(theta, dist, u));
      EXPECT_NEAR(a, b, 1e-8 * (1.0 + std::abs(a)));
    }
    // Second directional derivative of mean KL equals v^T F v.
    const Eigen::VectorXd v = random_matrix(theta.size(), 1, rng);
    const double h = 1e-4;
    const double kl_p = pi.mean_kl(dist, pi.evaluate(theta + h * v, states));
    const double kl_m = pi.mean_kl(dist, pi.evaluate(theta - h * v, states));
    const double fvv = v.dot(pi.fisher_vector_product(theta, dist, v));
    EXPECT_NEAR((kl_p + kl_m) / (h * h), fvv, 1e-4 * (1.0 + fvv));
    EXPECT_EQ(pi.mean_kl(dist, dist), 0.0);
  }
}
