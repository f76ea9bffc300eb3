#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sparsecp/errors.hpp"
#include "sparsecp/experiment.hpp"
#include "sparsecp/likelihood.hpp"
#include "sparsecp/rng.hpp"
#include "sparsecp/theory.hpp"

using namespace sparsecp;
using namespace sparsecp::theory;

TEST(Beta, LargeDynamicRangeStaysAboveOne) {
  const long double ratio = 14.0L / 1e10L;
  const double expected = static_cast<double>(1.0L + std::log1p(ratio) / std::log(10.0L));
  const double beta = compute_beta(1, 1, 1, 1, 1e10, 10);
  EXPECT_DOUBLE_EQ(beta, expected);
  EXPECT_GT(beta, 1.0);
  EXPECT_NEAR(beta, 1.0, 1e-9);
}

TEST(Beta, DirectSubstitution) { EXPECT_DOUBLE_EQ(compute_beta(1, 1, 1, 1, 14, 4), 1.5); }

TEST(Beta, ExperimentScaleRecomputed) {
  ExperimentConfig cfg;
  const auto p = generate_synthetic(cfg, derive_seed(cfg.master_seed, Stream::Truth));
  const long double x = 2.0L * static_cast<long double>(max_abs(p.truth));
  const long double expected = 1.0L + std::log(14.0L * 5 * 2 * 2 * 20 / x + 1.0L) / std::log(50.0L);
  const double beta = compute_beta(5, 2, 2, 20, static_cast<double>(x), 50);
  EXPECT_NEAR(beta, static_cast<double>(std::max(1.0L, expected)), 1e-14);
  EXPECT_GT(beta, 1.0);
}

TEST(Beta, RejectsBadInputs) {
  EXPECT_THROW(compute_beta(0, 1, 1, 1, 1, 10), ConfigError);
  EXPECT_THROW(compute_beta(1, -1, 1, 1, 1, 10), ConfigError);
  EXPECT_THROW(compute_beta(1, 1, 1, 1, 1, 1), ConfigError);
}

TEST(QD, Examples) {
  EXPECT_EQ(compute_qd_gaussian(1, 1), 2.0);
  EXPECT_EQ(compute_qd_gaussian(2, 0.25), 128.0);
}

TEST(QD, DominatesKlOverTheBox) {
  Rng rng(1);
  const double x_max = 1.7, sigma = 0.4;
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) worst = std::max(worst, gaussian_kl(rng.uniform(-x_max, x_max), rng.uniform(-x_max, x_max), sigma));
  EXPECT_LE(worst, compute_qd_gaussian(x_max, sigma));
  EXPECT_DOUBLE_EQ(gaussian_kl(x_max, -x_max, sigma), compute_qd_gaussian(x_max, sigma));
}

TEST(Lambda, Examples) {
  EXPECT_DOUBLE_EQ(compute_lambda(1.0, 1.5, 30), 24.0 * std::log(30.0));
  const long double expected = 4.0L * (1.0L + 256.0L / 3.0L) * 3.5L * std::log(50.0L);
  EXPECT_NEAR(compute_lambda(1.5, 128, 50), static_cast<double>(expected), 1e-12 * static_cast<double>(expected));
}

TEST(Lambda, AlwaysSatisfiesLowerBound) {
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const double beta = rng.uniform(1, 4), q = rng.uniform(0.01, 1000);
    const auto n = static_cast<std::int64_t>(2 + rng.below(500));
    EXPECT_GE(compute_lambda(beta, q, n), lambda_lower_bound(beta, q, n));
  }
}

TEST(Levels, PowersOfTwo) {
  EXPECT_EQ(levels(2, 2.0), 4u);
  EXPECT_EQ(levels(4, 1.0), 4u);
  EXPECT_EQ(levels(50, 1.0), 64u);
  EXPECT_EQ(levels(8, 1.0), 8u);
  EXPECT_EQ(location_levels(1, 1), 1u);
  EXPECT_EQ(location_levels(2, 1), 2u);
  EXPECT_EQ(location_levels(50, 5), 256u);
}

TEST(Penalty, Examples) {
  const ProblemSize s{2, 2, 2, 1};
  ASSERT_EQ(levels(s.n_max(), 2.0), 4u);
  EXPECT_EQ(penalty(s, 1, 2.0), 11.0);
  EXPECT_EQ(penalty(s, 0, 2.0), 8.0);
  EXPECT_THROW(penalty(s, 3, 2.0), ConfigError);
  EXPECT_THROW(penalty(s, -1, 2.0), ConfigError);
}

TEST(Penalty, CodeLengthPredicateHolds) {
  for (std::int64_t n1 : {1, 4, 10, 30})
    for (std::int64_t n2 : {1, 5, 30})
      for (std::int64_t n3 : {2, 7, 50, 100})
        for (std::int64_t f : {1, 3, 5, 15}) {
          const ProblemSize s{n1, n2, n3, f};
          if (s.n_max() < 4) continue;
          for (double x : {0.1, 1.0, 10.0}) {
            const double beta = compute_beta(f, 2, 2, 20, x, s.n_max());
            EXPECT_TRUE(code_length_bound_holds(s, beta)) << n1 << ' ' << n2 << ' ' << n3 << ' ' << f << ' ' << x;
          }
        }
}

TEST(Penalty, LevelsCoverQuantizationFromBeta) {
  for (double x : {0.5, 3.0, 40.0}) {
    const double beta = compute_beta(5, 2, 2, 20, x, 50);
    EXPECT_TRUE(levels_cover_quantization(levels(50, beta), 5, 2, 2, 20, x));
  }
}

TEST(Dof, Examples) {
  EXPECT_EQ(degrees_of_freedom(30, 30, 5, 50), 350);
  EXPECT_EQ(degrees_of_freedom(30, 30, 0, 0), 0);
  EXPECT_EQ(30 * 30 * 5 + 50, 4550);
  const auto r = evaluate_bounds({{30, 30, 50, 5}, 50, 22500, 0.25, 2, 2, 20, 10});
  EXPECT_EQ(r.dof, 350);
  EXPECT_EQ(r.dof_matricized, 4550);
}

TEST(ErrorBound, DecreasesWithSamples) {
  const ProblemSize s{30, 30, 50, 5};
  for (double m = 3; m * 2 <= 45000; m *= 2) {
    const double first_m = 70 * 100 * std::log(m) / m, first_2m = 70 * 100 * std::log(2 * m) / (2 * m);
    EXPECT_LT(first_2m, first_m);
    EXPECT_LT(error_bound_rhs(s, 50, 2 * m, 0.25, 10, 1.5), error_bound_rhs(s, 50, m, 0.25, 10, 1.5));
  }
}

TEST(ErrorBound, LinearInFactorDegrees) {
  const double m = 1000, sigma = 0.5, x = 3, beta = 1.2;
  const double first = 70 * x * x * std::log(m) / m;
  const double one = error_bound_rhs({10, 10, 60, 1}, 0, m, sigma, x, beta) - first;
  const double three = error_bound_rhs({10, 10, 60, 3}, 0, m, sigma, x, beta) - first;
  EXPECT_NEAR(three, 3 * one, 1e-10 * three);
}

TEST(ErrorBound, ExperimentScaleValue) {
  const double m = 0.5 * 45000, sigma = 0.25, x = 10, beta = 1.5;
  const long double expected = 70.0L * x * x * std::log((long double)m) / m +
                               24.0L * (sigma * sigma + 2.0L * x * x) * (beta + 2.0L) * std::log(50.0L) * 350.0L / m;
  EXPECT_NEAR(error_bound_rhs({30, 30, 50, 5}, 50, m, sigma, x, beta), static_cast<double>(expected),
              1e-12 * static_cast<double>(expected));
}

TEST(ErrorBound, RejectsOutOfRangeSamples) {
  EXPECT_THROW(error_bound_rhs({2, 2, 2, 1}, 0, 0.5, 1, 1, 1), ConfigError);
  EXPECT_THROW(error_bound_rhs({2, 2, 2, 1}, 0, 9, 1, 1, 1), ConfigError);
}

// The literal penalty does not charge for nnz(C), so over the unconstrained class the
// Kraft sum is (1 + 1/L_loc)^(n3 F). These tests pin that closed form; the acceptance
// suite checks the inequality itself.
TEST(Kraft, EnumerationMatchesClosedForm) {
  struct Case {
    Index n1, n2, n3, f;
    std::uint64_t l_lev;
  };
  for (const auto& c : {Case{1, 1, 1, 1, 2}, Case{1, 1, 2, 1, 2}, Case{2, 1, 3, 1, 2}, Case{1, 1, 2, 2, 2},
                        Case{1, 1, 5, 1, 4}}) {
    const auto l_loc = location_levels(c.n3, c.f);
    const auto k = oracle::kraft_enumerate(c.n1, c.n2, c.n3, c.f, c.l_lev, l_loc);
    ASSERT_GT(k.codewords, 0u);
    const double closed = std::pow(1.0 + 1.0 / static_cast<double>(l_loc), static_cast<double>(c.n3 * c.f));
    EXPECT_NEAR(k.sum, closed, 1e-12 * closed);
  }
}

TEST(Kraft, TinyClassSum) {
  const auto k = oracle::kraft_enumerate(1, 1, 1, 1, 2, location_levels(1, 1));
  EXPECT_EQ(k.codewords, 12u);
  EXPECT_DOUBLE_EQ(k.sum, 2.0);
}

TEST(Kraft, CountPrefixedCodeSatisfiesInequality) {
  for (Index n3 : {1, 2, 3, 5}) {
    const auto k = oracle::kraft_enumerate(1, 1, n3, 1, 2, location_levels(n3, 1), true);
    ASSERT_GT(k.codewords, 0u);
    EXPECT_LE(k.sum, 1.0 + 1e-12);
  }
}

TEST(EvaluateBounds, ConsistentWithComponents) {
  const BoundInputs in{{30, 30, 50, 5}, 50, 22500, 0.25, 2, 2, 20, 9.4};
  const auto r = evaluate_bounds(in);
  EXPECT_EQ(r.beta, compute_beta(5, 2, 2, 20, 9.4, 50));
  EXPECT_EQ(r.l_lev, levels(50, r.beta));
  EXPECT_EQ(r.l_loc, 256u);
  EXPECT_EQ(r.q_d, compute_qd_gaussian(9.4, 0.25));
  EXPECT_EQ(r.lambda, compute_lambda(r.beta, r.q_d, 50));
  EXPECT_GE(r.lambda, r.lambda_min);
  EXPECT_EQ(r.penalty_bits, penalty(in.size, 50, r.beta));
  EXPECT_EQ(r.rhs, error_bound_rhs(in.size, 50, 22500, 0.25, 9.4, r.beta));
  EXPECT_TRUE(r.code_length_bound);
  EXPECT_TRUE(r.quantization_predicate);
}
