#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asyncts/extreme.hpp"
#include "asyncts/network.hpp"
#include "asyncts/protocol.hpp"
#include "asyncts/schedule.hpp"

namespace asyncts {

double rmse(std::span<const double> pred, std::span<const double> actual);

/// One-vs-rest scores for the right-extreme class. A zero denominator yields
/// 0 and sets the matching flag.
struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  bool precision_undefined = false;
  bool recall_undefined = false;
};

PrecisionRecall extreme_prf(std::span<const IndicatorLabel> predicted, std::span<const IndicatorLabel> actual);

struct RoundMetrics {
  std::uint64_t round = 0;
  std::uint64_t s_i = 0;
  double eta = 0.0;
  std::uint64_t cum_iters = 0;  ///< iterations through the end of this round
  double train_loss = 0.0;      ///< mean per-step loss in the round
  double test_rmse = 0.0;       ///< global model at round completion, normalized units
  double wall_ms = 0.0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  std::uint64_t max_staleness = 0;
};

/// Everything two runs must share for their wall times to be comparable.
struct ComparisonKey {
  std::uint64_t budget = 0;
  SampleSizeSchedule sample;
  StepSizeSchedule step;
  std::size_t lstm_layers = 0;
  std::size_t hidden = 0;
  std::vector<std::size_t> fc_dims;
  std::size_t window = 0;
  std::uint64_t seed = 0;

  bool operator==(const ComparisonKey& o) const;
};

struct RunTotals {
  double wall_ms = 0.0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  std::uint64_t accepted_iterations = 0;
  std::uint64_t updates = 0;
  std::uint64_t rounds = 0;
  std::uint64_t planned_rounds = 0;
  std::uint64_t budget = 0;
  std::uint64_t max_staleness = 0;
  double final_test_rmse = 0.0;
  double final_train_loss = 0.0;
};

struct ExperimentReport {
  std::string config_echo;
  ComparisonKey key;
  std::size_t clients = 1;
  ExchangeMode mode = ExchangeMode::model;
  DelayPolicy delay;
  std::vector<RoundMetrics> rounds;
  RunTotals totals;
  GlobalModelState final_state;
  AuditResult audit;
  bool conservation_ok = false;
  std::vector<ParameterVector> round_params;  ///< only when requested
  std::optional<double> baseline_wall_ms;
};

/// The subset of report.txt needed to compare runs.
struct ReportSummary {
  ComparisonKey key;
  std::size_t clients = 1;
  double total_wall_ms = 0.0;
  std::uint64_t accepted_iterations = 0;
  std::uint64_t rounds = 0;
  double final_test_rmse = 0.0;
};

ReportSummary summarize(const ExperimentReport& report);

/// Wall time of the single-client run divided by that of the n-client run.
double speedup(const ReportSummary& report_n, const ReportSummary& report_1);
double speedup(const ExperimentReport& report_n, const ExperimentReport& report_1);

/// `round,s_i,eta_i,cum_iters,train_loss,test_rmse,wall_ms,bytes_up,bytes_down,max_staleness`
void write_rounds_csv(std::ostream& out, std::span<const RoundMetrics> rounds);

// report.txt: `key = value` lines, `#` comments. Keys written, in order:
// clients, exchange, delay, budget_K, schedule_a, schedule_p, schedule_b,
// eta0, beta, lstm_layers, hidden, fc_dims, window, seed, planned_rounds,
// rounds, updates, accepted_iterations, conservation, delay_audit,
// total_wall_ms, bytes_up, bytes_down, max_staleness, final_train_loss,
// final_test_rmse, and when a baseline is known baseline_wall_ms and
// speedup_vs_baseline.
void write_report(std::ostream& out, const ExperimentReport& report);
ReportSummary parse_report(std::istream& in);
std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source = "<stream>");

struct PredictionRow {
  std::size_t index;
  std::string date;
  double actual_price;
  double predicted_price;
};

/// `index,date,actual_price,predicted_price`
void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows);

}  // namespace asyncts
