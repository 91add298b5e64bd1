#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asyncts/data.hpp"
#include "asyncts/metrics.hpp"
#include "asyncts/network.hpp"
#include "asyncts/protocol.hpp"
#include "asyncts/schedule.hpp"

namespace asyncts {

/// threaded: one OS thread per client plus the server role on the calling
/// thread. deterministic: a single-threaded discrete-event simulation in
/// virtual time; same seed, same schedule of pulls and pushes.
enum class Executor { threaded, deterministic };

std::string to_string(Executor e);
Executor parse_executor(std::string_view text);

/// Nominal virtual cost of one SGD iteration in the deterministic executor.
inline constexpr std::uint64_t kVirtualIterationUs = 100;

struct ExperimentConfig {
  NetworkConfig network;
  SampleSizeSchedule sample;
  StepSizeSchedule step;
  std::uint64_t budget = 288375;
  std::size_t clients = 1;
  ExchangeMode mode = ExchangeMode::model;
  DelayPolicy delay;
  bool share_data = true;
  std::uint64_t seed = 42;
  Executor executor = Executor::threaded;
  /// Upper bound of the uniform per-round client delay: a real sleep in
  /// threaded mode, virtual microseconds in deterministic mode.
  std::uint64_t jitter_us = 0;
  std::optional<EvlContext> evl;
  bool evaluate_rounds = true;  ///< test RMSE at every round completion
  bool record_round_params = false;
  std::string echo;  ///< copied into the report
};

/// Training windows client `client` samples from.
std::span<const NormalizedWindow> client_shard(std::span<const NormalizedWindow> train, std::size_t client,
                                               std::size_t clients, bool share_data);

/// Executes the whole round plan. Throws NumericError (with client and round
/// context) when training diverges and ContractError when the conservation
/// audit fails; the delay audit result is returned in the report.
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::span<const NormalizedWindow> train,
                                std::span<const NormalizedWindow> test);

std::vector<double> predict_all(const ParameterVector& params, const NetworkConfig& cfg,
                                std::span<const NormalizedWindow> windows);
double evaluate_rmse(const ParameterVector& params, const NetworkConfig& cfg,
                     std::span<const NormalizedWindow> windows);

}  // namespace asyncts
