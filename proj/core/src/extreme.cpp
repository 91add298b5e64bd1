#include "asyncts/extreme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "asyncts/error.hpp"

namespace asyncts {
namespace {

void check_evl_args(double u, int v, const EvlParams& p) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("EVL: u must lie in (0,1), got " + std::to_string(u));
  if (v != 0 && v != 1) throw DomainError("EVL: label must be 0 or 1");
  p.validate();
  if (1.0 - u / p.gamma <= 0.0 || 1.0 - (1.0 - u) / p.gamma <= 0.0) {
    throw DomainError("EVL: bracket base not positive for gamma " + std::to_string(p.gamma));
  }
}

}  // namespace

void EventThresholds::validate() const {
  if (!(std::isfinite(epsilon1) && epsilon1 > 0.0 && std::isfinite(epsilon2) && epsilon2 > 0.0)) {
    throw ArgumentError("event thresholds must be finite and strictly positive");
  }
}

void EvlParams::validate() const {
  if (!(beta0 >= 0.0 && beta0 <= 1.0 && beta1 >= 0.0 && beta1 <= 1.0)) {
    throw ArgumentError("EVL betas must be probabilities");
  }
  if (beta0 + beta1 > 1.0 + 1e-12) throw ArgumentError("EVL betas must sum to at most 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("EVL gamma must be finite and positive");
}

IndicatorLabel indicator(double y, const EventThresholds& th) {
  if (!std::isfinite(y)) throw DomainError("indicator: non-finite value");
  if (y > th.epsilon1) return IndicatorLabel::right;
  if (y < -th.epsilon2) return IndicatorLabel::left;
  return IndicatorLabel::normal;
}

int binary_label(IndicatorLabel label, ExtremeSide side) {
  return side == ExtremeSide::right ? static_cast<int>(label == IndicatorLabel::right)
                                    : static_cast<int>(label == IndicatorLabel::left);
}

double gev_cdf(double y, double gamma) {
  if (gamma == 0.0) return std::exp(-std::exp(-y));
  const double base = 1.0 - y / gamma;
  if (!(base > 0.0)) {
    throw DomainError("gev_cdf: 1 - y/gamma must be positive (y=" + std::to_string(y) +
                      ", gamma=" + std::to_string(gamma) + ")");
  }
  return std::exp(-std::pow(base, gamma));
}

double tail_prob(double y, double xi, double scale, double f_xi, double gamma) {
  if (!(y > xi)) throw DomainError("tail_prob: requires y > xi");
  if (!(scale > 0.0)) throw DomainError("tail_prob: scale must be positive");
  if (!(f_xi >= 0.0 && f_xi < 1.0)) throw DomainError("tail_prob: F(xi) must lie in [0,1)");
  const double g = gev_cdf((y - xi) / scale, gamma);
  return (1.0 - f_xi) * (1.0 - std::log(g));
}

double evl_loss(double u, int v, const EvlParams& p) {
  check_evl_args(u, v, p);
  double loss = 0.0;
  if (v == 1) loss -= p.beta0 * std::pow(1.0 - u / p.gamma, p.gamma) * std::log(u);
  else loss -= p.beta1 * std::pow(1.0 - (1.0 - u) / p.gamma, p.gamma) * std::log1p(-u);
  return loss;
}

double evl_grad(double u, int v, const EvlParams& p) {
  check_evl_args(u, v, p);
  const double g = p.gamma;
  if (v == 1) {
    // A(u) = (1 - u/g)^g, A'(u) = -(1 - u/g)^(g-1)
    const double base = 1.0 - u / g;
    const double a = std::pow(base, g);
    const double da = -std::pow(base, g - 1.0);
    return -p.beta0 * (da * std::log(u) + a / u);
  }
  // B(u) = (1 - (1-u)/g)^g, B'(u) = (1 - (1-u)/g)^(g-1)
  const double base = 1.0 - (1.0 - u) / g;
  const double b = std::pow(base, g);
  const double db = std::pow(base, g - 1.0);
  return -p.beta1 * (db * std::log1p(-u) - b / (1.0 - u));
}

double evl_loss_left(double u, IndicatorLabel label, const EvlParams& p) {
  return evl_loss(u, binary_label(label, ExtremeSide::left), p);
}

double evl_grad_left(double u, IndicatorLabel label, const EvlParams& p) {
  return evl_grad(u, binary_label(label, ExtremeSide::left), p);
}

EvlParams EventProportions::evl_params(double gamma, bool swap_betas) const {
  EvlParams p{beta0, beta1, gamma};
  return swap_betas ? p.swapped() : p;
}

EventProportions estimate_betas(std::span<const IndicatorLabel> labels) {
  if (labels.empty()) throw ArgumentError("estimate_betas: empty label list");
  EventProportions out;
  for (auto l : labels) {
    switch (l) {
      case IndicatorLabel::normal: ++out.normal; break;
      case IndicatorLabel::right: ++out.right; break;
      case IndicatorLabel::left: ++out.left; break;
    }
  }
  out.total = labels.size();
  const auto t = static_cast<double>(out.total);
  out.beta0 = static_cast<double>(out.normal) / t;
  out.beta1 = static_cast<double>(out.right) / t;
  out.beta_left = static_cast<double>(out.left) / t;
  return out;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw ArgumentError("quantile of empty list");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile level must lie in [0,1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

EventThresholds choose_thresholds(std::span<const double> train_targets, double q) {
  if (train_targets.size() < 2) throw ArgumentError("choose_thresholds: need at least two targets");
  if (!(q > 0.5 && q < 1.0)) throw ArgumentError("choose_thresholds: quantile must lie in (0.5, 1)");
  const auto [lo, hi] = std::minmax_element(train_targets.begin(), train_targets.end());
  if (*lo == *hi) {
    throw DataError("threshold clamp error: targets are constant (" + std::to_string(*lo) +
                    "), no extreme events can be separated");
  }
  constexpr double floor_value = std::numeric_limits<double>::min();
  return {std::max(quantile(train_targets, q), floor_value), std::max(-quantile(train_targets, 1.0 - q), floor_value)};
}

}  // namespace asyncts
