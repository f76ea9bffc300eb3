#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sparsecp/errors.hpp"
#include "sparsecp/likelihood.hpp"
#include "sparsecp/rng.hpp"

using namespace sparsecp;

namespace {

Observations single_sample(double y, double sigma) { return Observations(SampleSet({1, 1, 1}, {{0, 0, 0}}), {y}, sigma); }

Observations random_obs(Rng& rng, const Dims& d, double gamma, double sigma) {
  const auto mask = sample_bernoulli_mask(d, gamma, rng.next_u64());
  std::vector<double> y(mask.size());
  for (auto& v : y) v = rng.normal();
  return Observations(mask, y, sigma);
}

Tensor3d random_tensor(Rng& rng, const Dims& d) {
  Tensor3d t(d);
  for (Index e = 0; e < t.size(); ++e) t.values()[e] = rng.normal();
  return t;
}

}  // namespace

TEST(NegLogLikelihood, ZeroResidual) {
  GaussianModel m(1.0);
  Tensor3d x({1, 1, 1});
  x(0, 0, 0) = 0.3;
  EXPECT_NEAR(neg_log_likelihood(m, x, single_sample(0.3, 1.0)), 0.9189385332046727, 1e-12);
}

TEST(NegLogLikelihood, MatchesMinusLogDensity) {
  GaussianModel m(0.5);
  Tensor3d x({1, 1, 1});
  const double expected = 0.5 * std::log(std::numbers::pi / 2.0) + 2.0;
  EXPECT_NEAR(neg_log_likelihood(m, x, single_sample(1.0, 0.5)), expected, 1e-12);
  EXPECT_NEAR(neg_log_likelihood(m, x, single_sample(1.0, 0.5)), -oracle::normal_log_pdf(1.0, 0.0, 0.5), 1e-12);
}

TEST(NegLogLikelihood, DataTermScalesQuadratically) {
  Rng rng(1);
  const auto obs = random_obs(rng, {3, 4, 5}, 0.5, 0.8);
  GaussianModel m(0.8);
  Tensor3d y({3, 4, 5});
  for (std::size_t t = 0; t < obs.size(); ++t) y.values()[obs.samples.linear(t)] = obs.values[t];
  const Tensor3d r = random_tensor(rng, {3, 4, 5});
  EXPECT_NEAR(nll_data_term(m, y + 2.0 * r, obs), 4.0 * nll_data_term(m, y + r, obs), 1e-10);
}

TEST(NegLogLikelihood, DimensionMismatchThrows) {
  GaussianModel m(1.0);
  EXPECT_THROW(neg_log_likelihood(m, Tensor3d({2, 1, 1}), single_sample(1.0, 1.0)), DimensionError);
  EXPECT_THROW(nll_gradient(m, Tensor3d({2, 1, 1}), single_sample(1.0, 1.0)), DimensionError);
}

TEST(GaussianModel, RejectsNonPositiveSigma) {
  EXPECT_THROW(GaussianModel(0.0), ConfigError);
  EXPECT_THROW(GaussianModel(-1.0), ConfigError);
}

TEST(NllGradient, ZeroAtDataAndOffSupport) {
  Rng rng(2);
  const auto obs = random_obs(rng, {3, 3, 3}, 0.5, 1.0);
  GaussianModel m(1.0);
  Tensor3d x = random_tensor(rng, {3, 3, 3});
  const VectorX<double> mask = obs.samples.dense_mask();
  const auto g = nll_gradient(m, x, obs);
  for (Index e = 0; e < x.size(); ++e)
    if (mask[e] == 0.0) EXPECT_EQ(g.values()[e], 0.0);
  for (std::size_t t = 0; t < obs.size(); ++t) x.values()[obs.samples.linear(t)] = obs.values[t];
  EXPECT_EQ(nll_gradient(m, x, obs).frobenius_norm(), 0.0);
}

TEST(NllGradient, MatchesCentralDifferences) {
  Rng rng(3);
  const double h = 1e-5;
  for (int inst = 0; inst < 100; ++inst) {
    const double sigma = rng.uniform(0.2, 2.0);
    const auto obs = random_obs(rng, {3, 3, 3}, 0.6, sigma);
    GaussianModel m(sigma);
    Tensor3d x = random_tensor(rng, {3, 3, 3});
    const auto g = nll_gradient(m, x, obs);
    VectorX<double> fd(x.size());
    for (Index e = 0; e < x.size(); ++e) {
      Tensor3d xp = x, xm = x;
      xp.values()[e] += h;
      xm.values()[e] -= h;
      fd[e] = (neg_log_likelihood(m, xp, obs) - neg_log_likelihood(m, xm, obs)) / (2.0 * h);
    }
    EXPECT_LT((fd - g.values()).norm() / std::max(1e-12, g.values().norm()), 1e-6) << "instance " << inst;
  }
}

TEST(NegLogLikelihood, ConvexAlongSegments) {
  Rng rng(4);
  const auto obs = random_obs(rng, {4, 4, 4}, 0.5, 0.6);
  GaussianModel m(0.6);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor3d x1 = random_tensor(rng, {4, 4, 4}), x2 = random_tensor(rng, {4, 4, 4});
    const double t = rng.uniform();
    const double lhs = neg_log_likelihood(m, t * x1 + (1.0 - t) * x2, obs);
    const double rhs = t * neg_log_likelihood(m, x1, obs) + (1.0 - t) * neg_log_likelihood(m, x2, obs);
    EXPECT_LE(lhs, rhs + 1e-10);
  }
}

TEST(GaussianKl, Examples) {
  EXPECT_EQ(gaussian_kl(0.7, 0.7, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(gaussian_kl(1.0, 0.0, 0.5), 2.0);
  EXPECT_NEAR(oracle::kl_by_integration(1.0, 0.0, 0.5), 2.0, 1e-9);
  EXPECT_DOUBLE_EQ(gaussian_kl(0.2, -1.1, 0.9), gaussian_kl(-1.1, 0.2, 0.9));
}

TEST(GaussianAffinity, Examples) {
  EXPECT_EQ(gaussian_neg2log_affinity(0.7, 0.7, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(gaussian_neg2log_affinity(1.0, 0.0, 0.5), 1.0);
  EXPECT_NEAR(oracle::neg2log_affinity_by_integration(1.0, 0.0, 0.5), 1.0, 1e-9);
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const double a = rng.normal(), b = rng.normal(), s = rng.uniform(0.1, 2.0);
    EXPECT_DOUBLE_EQ(gaussian_neg2log_affinity(a, b, s), gaussian_kl(a, b, s) / 2.0);
  }
}

TEST(GaussianKl, TemplatedOnScalar) {
  EXPECT_FLOAT_EQ(gaussian_kl(1.0f, 0.0f, 0.5f), 2.0f);
  EXPECT_EQ(gaussian_neg2log_affinity(1.0L, 0.0L, 0.5L), 1.0L);
}

TEST(GaussianKl, SumOverSamplesEqualsJointDivergence) {
  // D(p_X*_S || p_X_S) = E_p[log p(Y) - log q(Y)] of the product densities, which for
  // equal variances is the difference of expected joint log densities evaluated in closed form:
  // E[(Y - x)^2] = sigma^2 + (x* - x)^2.
  Rng rng(6);
  const double sigma = 0.4;
  const auto mask = sample_bernoulli_mask({5, 5, 5}, 0.4, 7);
  const Tensor3d xs = random_tensor(rng, {5, 5, 5}), x = random_tensor(rng, {5, 5, 5});
  double per_entry = 0.0, joint_p = 0.0, joint_q = 0.0;
  for (std::size_t t = 0; t < mask.size(); ++t) {
    const Index e = mask.linear(t);
    per_entry += gaussian_kl(xs.values()[e], x.values()[e], sigma);
    const double d = xs.values()[e] - x.values()[e];
    joint_p += -0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) - 0.5;
    joint_q += -0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) - (sigma * sigma + d * d) / (2.0 * sigma * sigma);
  }
  EXPECT_NEAR(per_entry, joint_p - joint_q, 1e-10 * std::max(1.0, per_entry));
}

TEST(GaussianModel, ProxMinimizesScalarObjective) {
  GaussianModel m(0.7);
  const double y = 1.3, v = -0.4, rho = 2.5;
  const double p = m.prox(y, v, rho);
  auto f = [&](double x) { return m.entry_data_term(y, x) + 0.5 * rho * (x - v) * (x - v); };
  EXPECT_NEAR(p, oracle::golden_section(f, -5.0, 5.0), 1e-7);
}
