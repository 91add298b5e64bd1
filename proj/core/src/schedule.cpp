#include "asyncts/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "asyncts/error.hpp"

namespace asyncts {

void StepSizeSchedule::validate() const {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw ConfigError("opt.eta0 must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("opt.beta must be nonnegative");
}

void SampleSizeSchedule::validate() const {
  if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("schedule.a must be nonnegative");
  if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("schedule.b must be nonnegative");
  if (!(a + b > 0.0)) throw ConfigError("schedule.a + schedule.b must be positive");
  if (!std::isfinite(p)) throw ConfigError("schedule.p must be finite");
}

double stepsize(const StepSizeSchedule& sched, std::uint64_t t) {
  return sched.eta0 / (1.0 + sched.beta * std::sqrt(static_cast<double>(t)));
}

std::uint64_t sample_size(const SampleSizeSchedule& sched, std::uint64_t round_index) {
  if (round_index == 0) throw ArgumentError("sample_size: round indices start at 1");
  const double s = std::floor(sched.a * std::pow(static_cast<double>(round_index), sched.p) + sched.b);
  if (!(s >= 1.0)) return 1;
  if (s >= 1.8e19) return UINT64_MAX / 2;
  return static_cast<std::uint64_t>(s);
}

std::uint64_t RoundPlan::client_share(const PlannedRound& round, std::size_t client) const {
  const std::uint64_t taken = round.per_client * client;
  if (taken >= round.iterations) return 0;
  return std::min(round.per_client, round.iterations - taken);
}

RoundPlan build_round_plan(std::uint64_t budget, const SampleSizeSchedule& sched, const StepSizeSchedule& step,
                           std::size_t clients) {
  if (budget < 1) throw ArgumentError("build_round_plan: K must be at least 1");
  if (clients < 1) throw ArgumentError("build_round_plan: need at least one client");
  sched.validate();
  step.validate();
  RoundPlan plan;
  plan.budget = budget;
  plan.clients = clients;
  std::uint64_t done = 0;
  for (std::uint64_t i = 1; done < budget; ++i) {
    const std::uint64_t s = std::min(sample_size(sched, i), budget - done);
    PlannedRound r;
    r.index = i;
    r.iterations = s;
    r.per_client = (s + clients - 1) / clients;
    r.cum_start = done;
    r.eta = stepsize(step, done);
    plan.rounds.push_back(r);
    done += s;
  }
  return plan;
}

std::size_t count_rounds(std::uint64_t budget, const SampleSizeSchedule& sched) {
  if (budget < 1) throw ArgumentError("count_rounds: K must be at least 1");
  sched.validate();
  std::uint64_t done = 0;
  std::size_t t = 0;
  for (std::uint64_t i = 1; done < budget; ++i, ++t) done += sample_size(sched, i);
  return t;
}

GrowthCheck rounds_growth_check(std::span<const std::uint64_t> budgets, const SampleSizeSchedule& sched) {
  GrowthCheck out;
  for (std::size_t k = 0; k < budgets.size(); ++k) {
    if (k > 0 && budgets[k] <= budgets[k - 1]) throw ArgumentError("rounds_growth_check: budgets must increase");
    out.budgets.push_back(budgets[k]);
    out.rounds.push_back(count_rounds(budgets[k], sched));
    if (k > 0) out.ratios.push_back(static_cast<double>(out.rounds[k]) / static_cast<double>(out.rounds[k - 1]));
  }
  return out;
}

}  // namespace asyncts
