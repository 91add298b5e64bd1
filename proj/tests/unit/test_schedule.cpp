#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "asyncts/error.hpp"
#include "asyncts/schedule.hpp"

namespace asyncts {
namespace {

TEST(StepSize, Values) {
  const StepSizeSchedule s{0.01, 0.01};
  EXPECT_DOUBLE_EQ(stepsize(s, 0), 0.01);
  EXPECT_NEAR(stepsize(s, 10000), 0.005, 1e-18);
  double prev = 1.0;
  for (std::uint64_t t = 0; t < 100000; t += 997) {
    const double v = stepsize(s, t);
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_THROW((StepSizeSchedule{0.0, 0.01}.validate()), ConfigError);
  EXPECT_THROW((StepSizeSchedule{0.01, -1.0}.validate()), ConfigError);
}

TEST(SampleSize, LinearAndPolynomial) {
  const SampleSizeSchedule lin{10, 1, 0};
  EXPECT_EQ(sample_size(lin, 1), 10u);
  EXPECT_EQ(sample_size(lin, 240), 2400u);
  EXPECT_EQ(sample_size({2.5, 2, 0.5}, 3), 23u);  // floor(22.5 + 0.5)
  EXPECT_EQ(sample_size({0.1, 1, 0}, 1), 1u);     // floor 0.1 -> at least 1
  EXPECT_THROW(sample_size(lin, 0), ArgumentError);
}

TEST(RoundPlan, ReferenceBudget) {
  const auto plan = build_round_plan(288375, {10, 1, 0}, {0.01, 0.01}, 1);
  ASSERT_EQ(plan.round_count(), 240u);
  EXPECT_EQ(plan.rounds.back().iterations, 1575u);
  EXPECT_EQ(plan.rounds.back().cum_start, 286800u);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < plan.rounds.size(); ++i) {
    const auto& r = plan.rounds[i];
    EXPECT_EQ(r.index, i + 1);
    EXPECT_EQ(r.cum_start, total);
    EXPECT_DOUBLE_EQ(r.eta, stepsize({0.01, 0.01}, r.cum_start));
    total += r.iterations;
  }
  EXPECT_EQ(total, 288375u);
  EXPECT_EQ(count_rounds(288375, {10, 0, 0}), 28838u);
}

TEST(RoundPlan, OtherOracles) {
  EXPECT_EQ(count_rounds(72093, {10, 1, 0}), 120u);
  EXPECT_EQ(count_rounds(12750, {10, 1, 0}), 50u);
  EXPECT_EQ(count_rounds(1, {10, 1, 0}), 1u);
  EXPECT_THROW(build_round_plan(0, {10, 1, 0}, {0.01, 0.01}, 1), ArgumentError);
  EXPECT_THROW(build_round_plan(100, {10, 1, 0}, {0.01, 0.01}, 0), ArgumentError);
}

TEST(RoundPlan, ClientSharesCoverEachRound) {
  for (std::size_t n : {1u, 2u, 3u, 5u, 7u, 10u}) {
    const auto plan = build_round_plan(50000, {10, 1, 0}, {0.01, 0.01}, n);
    for (const auto& r : plan.rounds) {
      EXPECT_EQ(r.per_client, (r.iterations + n - 1) / n);
      std::uint64_t sum = 0;
      for (std::size_t c = 0; c < n; ++c) {
        const auto share = plan.client_share(r, c);
        EXPECT_LE(share, r.per_client);
        sum += share;
      }
      ASSERT_EQ(sum, r.iterations) << "n=" << n << " round " << r.index;
    }
  }
}

TEST(RoundPlan, TrailingClientsMayIdle) {
  const auto plan = build_round_plan(10, {10, 1, 0}, {0.01, 0.01}, 4);
  ASSERT_EQ(plan.round_count(), 1u);
  const auto& r = plan.rounds[0];
  EXPECT_EQ(plan.client_share(r, 0), 3u);
  EXPECT_EQ(plan.client_share(r, 1), 3u);
  EXPECT_EQ(plan.client_share(r, 2), 3u);
  EXPECT_EQ(plan.client_share(r, 3), 1u);
  const auto small = build_round_plan(30, {10, 1, 0}, {0.01, 0.01}, 8);
  EXPECT_EQ(small.client_share(small.rounds[0], 5), 0u);  // 10 over 8 clients: 2,2,2,2,2,0,0,0
}

TEST(Growth, QuadrupledBudgetDoublesRounds) {
  const std::vector<std::uint64_t> budgets{100000, 400000, 1600000};
  const auto g = rounds_growth_check(budgets, {10, 1, 0});
  ASSERT_EQ(g.ratios.size(), 2u);
  for (double r : g.ratios) {
    EXPECT_GE(r, 1.9);
    EXPECT_LE(r, 2.1);
  }
  EXPECT_EQ(g.rounds[0], 141u);
  EXPECT_EQ(g.rounds[1], 283u);
}

}  // namespace
}  // namespace asyncts
