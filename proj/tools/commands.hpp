#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "asyncts/config.hpp"
#include "asyncts/data.hpp"
#include "asyncts/experiment.hpp"
#include "asyncts/extreme.hpp"
#include "asyncts/metrics.hpp"
#include "asyncts/schedule.hpp"

namespace asyncts::cli {

enum ExitCode : int { ok = 0, config_error = 1, data_error = 2, runtime_error = 3 };

int exit_code_for(const std::exception& e);

struct CommandContext {
  std::optional<std::filesystem::path> out_dir;
  std::ostream* out = nullptr;  ///< stdout-like sink for printed results
  std::optional<std::filesystem::path> baseline;
};

struct PreparedData {
  RawSeries series;
  DatasetSplit split;
};

PreparedData prepare_data(const RunConfig& cfg);

/// EVL context from the training targets: quantile thresholds, proportions
/// and the target standard deviation as the exceedance scale.
std::optional<EvlContext> evl_context(const RunConfig& cfg, const DatasetSplit& split);

/// lambda defaults to 1 / N_c with N_c the number of training windows.
ExperimentConfig experiment_config(const RunConfig& cfg, const DatasetSplit& split);

ExperimentReport cmd_train(const RunConfig& cfg, const CommandContext& ctx);
RoundPlan cmd_plan(const RunConfig& cfg, const CommandContext& ctx);

struct LabelSummary {
  EventThresholds thresholds;
  EventProportions proportions;  ///< over training targets
  std::vector<IndicatorLabel> labels;  ///< train targets then test targets
};
LabelSummary cmd_label_events(const RunConfig& cfg, const CommandContext& ctx);

struct ExchangeComparison {
  double model_rmse = 0.0;
  double gradient_rmse = 0.0;
  std::uint64_t model_bytes = 0;
  std::uint64_t gradient_bytes = 0;
  std::string text;  ///< compare.txt contents
};
ExchangeComparison cmd_compare_exchange(const RunConfig& cfg, const CommandContext& ctx);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace asyncts::cli
