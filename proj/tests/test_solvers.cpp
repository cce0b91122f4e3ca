#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aoi/error.hpp"
#include "aoi/evaluation.hpp"
#include "aoi/policies.hpp"
#include "aoi/solvers.hpp"
#include "support/oracles.hpp"

using namespace aoi;

TEST(RelativeValueIteration, ReferenceGains) {
  EXPECT_NEAR(*relative_value_iteration(ServiceDistribution({0.4, 0.2, 0.2, 0.2}), 100).value.gain,
              2.4952, 5e-3);
  EXPECT_NEAR(*relative_value_iteration(ServiceDistribution({0.7, 0.1, 0.2}), 100).value.gain, 1.4286,
              5e-3);
  EXPECT_NEAR(
      *relative_value_iteration(ServiceDistribution({0.05, 0.5, 0.1, 0.3, 0.05}), 200).value.gain,
      3.8049, 5e-3);
}

TEST(RelativeValueIteration, DeterministicService) {
  const auto result = relative_value_iteration(ServiceDistribution({1.0}), 10);
  EXPECT_NEAR(*result.value.gain, 1.0, 1e-12);
  EXPECT_NEAR(exact_average_age(result.policy, ServiceDistribution({1.0}), 10).average_age, 1.0, 1e-12);
}

TEST(RelativeValueIteration, ReferenceIsZero) {
  const auto result = relative_value_iteration(ServiceDistribution({0.4, 0.3, 0.3}), 40);
  EXPECT_EQ(result.value.at(empty_state(1)), 0.0);
  EXPECT_LT(result.value.residual, 1e-10);
}

TEST(RelativeValueIteration, MatchesBruteForceOptimum) {
  const std::vector<std::vector<double>> cases{
      {0.4, 0.6}, {0.6, 0.4}, {0.9, 0.1}, {0.4, 0.3, 0.3}, {0.2, 0.3, 0.5}, {0.7, 0.1, 0.2}};
  for (const auto& p : cases) {
    const int K = 4;
    const double brute = oracle::brute_force_optimal_gain(p, K);
    const double rvi = *relative_value_iteration(ServiceDistribution(p), K).value.gain;
    EXPECT_NEAR(rvi, brute, 1e-8) << p.size() << " " << p[0];
  }
}

TEST(RelativeValueIteration, GainIndependentOfStart) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (const auto& p : oracle::random_corpus(15, 5, 31)) {
    const ServiceDistribution d(p);
    const int K = 40;
    SolverConfig cfg;
    const double zero_start = *relative_value_iteration(d, K, cfg).value.gain;
    cfg.initial_values.resize(StateSpace(K, d.support()).size());
    for (double& v : cfg.initial_values) v = u(rng);
    EXPECT_NEAR(*relative_value_iteration(d, K, cfg).value.gain, zero_start, 1e-8);
  }
}

TEST(RelativeValueIteration, ValueNondecreasingInAge) {
  for (const auto& p : oracle::random_corpus(15, 5, 32)) {
    const ServiceDistribution d(p);
    const int K = 40;
    const auto result = relative_value_iteration(d, K);
    const StateSpace& space = result.value.space;
    for (int v1 = 1; v1 < K; ++v1) {
      EXPECT_LE(result.value.at(empty_state(v1)), result.value.at(empty_state(v1 + 1)) + 1e-9);
      for (int v2 = 1; v2 <= std::min(v1, d.support() - 1); ++v2) {
        ASSERT_TRUE(space.contains(State{v1 + 1, v2}));
        EXPECT_LE(result.value.at(State{v1, v2}), result.value.at(State{v1 + 1, v2}) + 1e-9);
      }
    }
  }
}

TEST(RelativeValueIteration, GreedyPolicyAttainsGain) {
  for (const auto& p : oracle::random_corpus(15, 5, 33)) {
    const ServiceDistribution d(p);
    const int K = 60;
    const auto result = relative_value_iteration(d, K);
    EXPECT_NEAR(exact_average_age(result.policy, d, K).average_age, *result.value.gain, 1e-6);
    for (const State& s : result.policy.space().states()) {
      if (s.empty()) {
        EXPECT_EQ(result.policy.at(s), Action::Sample) << to_string(s);
      }
    }
  }
}

TEST(RelativeValueIteration, PolicyShapes) {
  const ServiceDistribution fast({0.7, 0.1, 0.2});
  const auto a = relative_value_iteration(fast, 100);
  for (int v1 = 1; v1 <= 100; ++v1) EXPECT_EQ(a.policy.at(State{v1, 1}), Action::Sample);
  EXPECT_NEAR(exact_average_age(a.policy, fast, 100).average_age, 1.0 / 0.7, 1e-6);

  const auto b = relative_value_iteration(ServiceDistribution({0.4, 0.2, 0.2, 0.2}), 100);
  EXPECT_FALSE(b.policy.same_table(always_preempt(100, 4)));
}

TEST(RelativeValueIteration, NoConvergence) {
  SolverConfig cfg;
  cfg.max_iterations = 2;
  try {
    relative_value_iteration(ServiceDistribution({0.4, 0.3, 0.3}), 40, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoConvergence);
    EXPECT_FALSE(e.context().empty());
  }
}

TEST(Lookahead, ZeroValuesTieGoesToIdle) {
  const ServiceDistribution d({0.4, 0.6});
  ValueFunction V(StateSpace(10, 2), std::vector<double>(StateSpace(10, 2).size(), 0.0));
  const auto q = lookahead(V, d, empty_state(5));
  EXPECT_EQ(q[0], 5.0);
  EXPECT_EQ(q[1], 5.0);
  EXPECT_TRUE(std::isnan(q[2]));
  EXPECT_EQ(extract_policy(V, d, 10).at(empty_state(5)), Action::Idle);
}

TEST(DiscountedValueIteration, DeterministicService) {
  // V = 1 + alpha V at (1, E) under V = C + alpha P V.
  SolverConfig cfg;
  cfg.discount = 0.5;
  const auto V = discounted_value_iteration(ServiceDistribution({1.0}), 3, cfg);
  EXPECT_NEAR(V.at(empty_state(1)), 2.0, 1e-9);
  EXPECT_EQ(*V.discount, 0.5);
}

TEST(DiscountedValueIteration, MatchesDenseOracle) {
  for (const auto& p : oracle::random_corpus(6, 4, 34)) {
    for (double alpha : {0.5, 0.9}) {
      const ServiceDistribution d(p);
      const int K = 12;
      SolverConfig cfg;
      cfg.discount = alpha;
      cfg.tol = 1e-12;
      const auto V = discounted_value_iteration(d, K, cfg);
      std::vector<oracle::OState> grid;
      const auto W = oracle::discounted_values(p, K, alpha, &grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const State s = grid[i].v2 == 0 ? empty_state(grid[i].v1) : State{grid[i].v1, grid[i].v2};
        EXPECT_NEAR(V.at(s), W[i], 1e-8 * std::max(1.0, W[i]));
      }
    }
  }
}

TEST(DiscountedValueIteration, ContractionRate) {
  const ServiceDistribution d({0.4, 0.3, 0.3});
  const double alpha = 0.9;
  std::vector<double> steps;
  SolverConfig cfg;
  cfg.discount = alpha;
  cfg.hooks.push_back([&](const IterationSnapshot& snap) { steps.push_back(snap.residual); });
  discounted_value_iteration(d, 50, cfg);
  ASSERT_GT(steps.size(), 10u);
  for (std::size_t n = 2; n < steps.size(); ++n) {
    EXPECT_LE(steps[n], alpha * steps[n - 1] + 1e-9 * steps[0]);
  }
}
