#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "asyncts/error.hpp"
#include "asyncts/extreme.hpp"

namespace asyncts {
namespace {

// Expected values below were computed with mpmath at 30 digits.

TEST(Indicator, ThreeWayLabels) {
  const EventThresholds th{0.05, 0.04};
  EXPECT_EQ(indicator(0.06, th), IndicatorLabel::right);
  EXPECT_EQ(indicator(0.05, th), IndicatorLabel::normal);
  EXPECT_EQ(indicator(-0.04, th), IndicatorLabel::normal);
  EXPECT_EQ(indicator(-0.041, th), IndicatorLabel::left);
  EXPECT_EQ(binary_label(IndicatorLabel::left, ExtremeSide::left), 1);
  EXPECT_EQ(binary_label(IndicatorLabel::left, ExtremeSide::right), 0);
  EXPECT_THROW(indicator(NAN, th), DomainError);
}

TEST(Gev, KnownValues) {
  EXPECT_NEAR(gev_cdf(0.0, 0.0), 0.367879441171442321595523770161, 1e-15);
  EXPECT_NEAR(gev_cdf(0.5, 0.0), 0.545239211892605055420150894449, 1e-15);
  EXPECT_NEAR(gev_cdf(1.0, 2.0), 0.778800783071404868245170266978, 1e-15);
  EXPECT_NEAR(gev_cdf(-1.0, 1.0), 0.135335283236612691893999494972, 1e-15);
  EXPECT_THROW(gev_cdf(2.0, 2.0), DomainError);
  EXPECT_THROW(gev_cdf(3.0, 1.0), DomainError);
}

TEST(Gev, MonotoneInY) {
  for (double g : {0.0, 1.0, 2.0, 5.0}) {
    double prev = 0.0;
    for (double y = -0.9; y < 0.9; y += 0.1) {
      const double v = gev_cdf(y, g);
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(TailProb, KnownValues) {
  EXPECT_NEAR(tail_prob(3.0, 0.0, 1.0, 0.95, 0.0), 0.0524893534183932437688780910123, 1e-15);
  EXPECT_NEAR(tail_prob(2.5, 0.5, 2.0, 0.9, 2.0), 0.125, 1e-15);
  EXPECT_THROW(tail_prob(0.0, 0.0, 1.0, 0.9, 0.0), DomainError);
  EXPECT_THROW(tail_prob(1.0, 0.0, 0.0, 0.9, 0.0), DomainError);
}

TEST(TailProb, DecaysTowardBaseMass) {
  double prev = INFINITY;
  for (double y = 0.5; y < 20.0; y += 0.5) {
    const double v = tail_prob(y, 0.0, 1.0, 0.95, 0.0);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.05);
    prev = v;
  }
}

TEST(Evl, KnownValues) {
  EXPECT_NEAR(evl_loss(0.5, 1, {0.9, 0.05, 2.0}), 0.350905760158472312892473761488, 1e-14);
  EXPECT_NEAR(evl_loss(0.3, 0, {0.9, 0.05, 2.0}), 0.00753475819070572104078370537503, 1e-15);
  EXPECT_NEAR(evl_loss(0.8, 1, {0.7, 0.2, 5.0}), 0.0653249086204047945716560502243, 1e-15);
  EXPECT_NEAR(evl_loss(0.8, 0, {0.7, 0.2, 5.0}), 0.262458346456221049284437501522, 1e-14);
}

TEST(Evl, LargeGammaApproachesExponentialWeights) {
  const EvlParams p{0.8, 0.15, 1e7};
  for (double u : {0.1, 0.4, 0.9}) {
    EXPECT_NEAR(evl_loss(u, 1, p), -0.8 * std::exp(-u) * std::log(u), 1e-6);
    EXPECT_NEAR(evl_loss(u, 0, p), -0.15 * std::exp(-(1.0 - u)) * std::log(1.0 - u), 1e-6);
  }
}

TEST(Evl, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uu(0.02, 0.98), bb(0.0, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const EvlParams p{bb(rng), bb(rng), std::vector<double>{1.0, 2.0, 5.0}[trial % 3]};
    const double u = uu(rng);
    for (int v : {0, 1}) {
      const double h = 1e-6;
      const double num = (evl_loss(u + h, v, p) - evl_loss(u - h, v, p)) / (2 * h);
      const double an = evl_grad(u, v, p);
      EXPECT_LE(std::abs(an - num), 1e-5 * std::max(1.0, std::abs(an))) << "u=" << u << " v=" << v;
    }
  }
}

TEST(Evl, DomainChecks) {
  const EvlParams p{0.9, 0.05, 2.0};
  EXPECT_THROW(evl_loss(0.0, 1, p), DomainError);
  EXPECT_THROW(evl_loss(1.0, 0, p), DomainError);
  EXPECT_THROW(evl_loss(0.5, 2, p), DomainError);
  EXPECT_THROW(evl_loss(0.9, 1, {0.9, 0.05, 0.5}), DomainError);  // 1 - u/gamma <= 0
  EXPECT_THROW(evl_loss(0.5, 1, {0.9, 0.5, 2.0}), ArgumentError);
}

TEST(Evl, LeftSideUsesLeftLabel) {
  const EvlParams p{0.9, 0.05, 2.0};
  EXPECT_DOUBLE_EQ(evl_loss_left(0.3, IndicatorLabel::left, p), evl_loss(0.3, 1, p));
  EXPECT_DOUBLE_EQ(evl_loss_left(0.3, IndicatorLabel::right, p), evl_loss(0.3, 0, p));
  EXPECT_DOUBLE_EQ(evl_grad_left(0.3, IndicatorLabel::normal, p), evl_grad(0.3, 0, p));
}

TEST(EstimateBetas, CountsAreExact) {
  std::vector<IndicatorLabel> labels;
  for (int i = 0; i < 90; ++i) labels.push_back(IndicatorLabel::normal);
  for (int i = 0; i < 6; ++i) labels.push_back(IndicatorLabel::right);
  for (int i = 0; i < 4; ++i) labels.push_back(IndicatorLabel::left);
  const auto p = estimate_betas(labels);
  EXPECT_EQ(p.normal + p.right + p.left, p.total);
  EXPECT_EQ(p.total, 100u);
  EXPECT_DOUBLE_EQ(p.beta0, 0.9);
  EXPECT_DOUBLE_EQ(p.beta1, 0.06);
  EXPECT_DOUBLE_EQ(p.beta_left, 0.04);
  EXPECT_NEAR(p.beta0 + p.beta1 + p.beta_left, 1.0, 1e-15);
  const auto e = p.evl_params(2.0, true);
  EXPECT_DOUBLE_EQ(e.beta0, 0.06);
  EXPECT_DOUBLE_EQ(e.beta1, 0.9);
  EXPECT_THROW(estimate_betas({}), ArgumentError);
}

TEST(Quantile, TypeSevenInterpolation) {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.9), 3.7);
}

TEST(ChooseThresholds, GridOracle) {
  std::vector<double> grid;
  for (int k = -100; k <= 100; ++k) grid.push_back(k / 100.0);
  const auto th = choose_thresholds(grid, 0.95);
  EXPECT_NEAR(th.epsilon1, 0.9, 1e-12);
  EXPECT_NEAR(th.epsilon2, 0.9, 1e-12);
}

TEST(ChooseThresholds, SymmetricDataGivesQuantileMass) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(2000);
  for (auto& x : v) x = dist(rng);
  const auto th = choose_thresholds(v, 0.95);
  std::vector<IndicatorLabel> labels;
  for (double x : v) labels.push_back(indicator(x, th));
  const auto p = estimate_betas(labels);
  EXPECT_NEAR(p.beta1, 0.05, 1.0 / 2000 + 1e-12);
  EXPECT_NEAR(p.beta_left, 0.05, 1.0 / 2000 + 1e-12);
}

TEST(ChooseThresholds, ClampAndErrors) {
  const std::vector<double> positive{1.0, 2.0, 3.0, 4.0};
  const auto th = choose_thresholds(positive, 0.95);
  EXPECT_EQ(th.epsilon2, std::numeric_limits<double>::min());
  EXPECT_THROW(choose_thresholds(std::vector<double>{0.5, 0.5, 0.5}, 0.95), DataError);
  EXPECT_THROW(choose_thresholds(positive, 0.4), ArgumentError);
}

}  // namespace
}  // namespace asyncts
