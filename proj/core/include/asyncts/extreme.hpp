#pragma once

#include <cstddef>
#include <span>

namespace asyncts {

/// Right threshold epsilon1 and left threshold epsilon2, both > 0.
struct EventThresholds {
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;

  void validate() const;
  /// Thresholds for the sign-flipped series: left extremes become right ones.
  EventThresholds mirrored() const { return {epsilon2, epsilon1}; }
};

enum class IndicatorLabel : int { left = -1, normal = 0, right = 1 };

/// Parameters of the Extreme Value Loss. beta0 weights the extreme-event term,
/// beta1 the normal-event term, gamma is the extreme value index.
struct EvlParams {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double gamma = 2.0;

  void validate() const;
  EvlParams swapped() const { return {beta1, beta0, gamma}; }
};

enum class ExtremeSide { right, left };

IndicatorLabel indicator(double y, const EventThresholds& th);

/// 1 when `label` is an extreme on `side`, else 0.
int binary_label(IndicatorLabel label, ExtremeSide side = ExtremeSide::right);

/// Generalized extreme value CDF G(y). Requires 1 - y/gamma > 0 when gamma != 0.
double gev_cdf(double y, double gamma);

/// Tail approximation 1 - F(y) ~ (1 - F(xi)) [1 - log G((y - xi) / scale)], y > xi.
/// Evaluated literally; it is an asymptotic formula and exceeds 1 - F(xi) near y = xi.
double tail_prob(double y, double xi, double scale, double f_xi, double gamma);

/// Extreme Value Loss for predicted probability u in (0,1) and binary label v.
double evl_loss(double u, int v, const EvlParams& p);

/// d evl_loss / d u.
double evl_grad(double u, int v, const EvlParams& p);

/// EVL for the left-extreme task: the left label is mapped to the binary
/// target and `u` is read as the probability of a left extreme.
double evl_loss_left(double u, IndicatorLabel label, const EvlParams& p);
double evl_grad_left(double u, IndicatorLabel label, const EvlParams& p);

struct EventProportions {
  double beta0 = 0.0;  ///< share of normal events
  double beta1 = 0.0;  ///< share of right extremes
  double beta_left = 0.0;
  std::size_t normal = 0;
  std::size_t right = 0;
  std::size_t left = 0;
  std::size_t total = 0;

  EvlParams evl_params(double gamma, bool swap_betas = false) const;
};

EventProportions estimate_betas(std::span<const IndicatorLabel> labels);

/// Linear-interpolation sample quantile (Hyndman-Fan type 7).
double quantile(std::span<const double> values, double q);

/// epsilon1 = quantile(q), epsilon2 = -quantile(1 - q), each clamped to the
/// smallest positive double. A constant series cannot be thresholded and
/// raises DataError.
EventThresholds choose_thresholds(std::span<const double> train_targets, double q);

}  // namespace asyncts
