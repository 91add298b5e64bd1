#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace asyncts {

/// eta(t) = eta0 / (1 + beta * sqrt(t)), t = cumulative iterations.
struct StepSizeSchedule {
  double eta0 = 0.01;
  double beta = 0.01;

  void validate() const;
};

/// s_i = floor(a * i^p + b), at least 1, for round index i >= 1.
struct SampleSizeSchedule {
  double a = 10.0;
  double p = 1.0;
  double b = 0.0;

  void validate() const;
};

double stepsize(const StepSizeSchedule& sched, std::uint64_t t);
std::uint64_t sample_size(const SampleSizeSchedule& sched, std::uint64_t round_index);

struct PlannedRound {
  std::uint64_t index = 0;       ///< 1-based round index i
  std::uint64_t iterations = 0;  ///< s_i, truncated in the final round
  std::uint64_t per_client = 0;  ///< ceil(s_i / n)
  double eta = 0.0;              ///< step size at cum_start
  std::uint64_t cum_start = 0;   ///< iterations completed before this round
};

struct RoundPlan {
  std::vector<PlannedRound> rounds;
  std::uint64_t budget = 0;  ///< K
  std::size_t clients = 1;   ///< n

  std::size_t round_count() const { return rounds.size(); }

  /// Iterations client `client` runs in round `round`. Clients take
  /// per_client each in id order until s_i is exhausted, so the last
  /// participating client absorbs the shortfall and trailing clients may get 0.
  std::uint64_t client_share(const PlannedRound& round, std::size_t client) const;
};

RoundPlan build_round_plan(std::uint64_t budget, const SampleSizeSchedule& sched, const StepSizeSchedule& step,
                           std::size_t clients);

/// Number of rounds T(K) needed to spend `budget` iterations.
std::size_t count_rounds(std::uint64_t budget, const SampleSizeSchedule& sched);

struct GrowthCheck {
  std::vector<std::uint64_t> budgets;
  std::vector<std::size_t> rounds;
  std::vector<double> ratios;  ///< rounds[k] / rounds[k-1]
};

GrowthCheck rounds_growth_check(std::span<const std::uint64_t> budgets, const SampleSizeSchedule& sched);

}  // namespace asyncts
