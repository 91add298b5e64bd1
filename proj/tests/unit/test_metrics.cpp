#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "asyncts/error.hpp"
#include "asyncts/metrics.hpp"

namespace asyncts {
namespace {

ExperimentReport sample_report() {
  ExperimentReport r;
  r.key.budget = 1000;
  r.key.sample = {10, 1, 0};
  r.key.step = {0.01, 0.01};
  r.key.lstm_layers = 2;
  r.key.hidden = 32;
  r.key.fc_dims = {16, 8, 1};
  r.key.window = 20;
  r.key.seed = 42;
  r.clients = 2;
  r.delay = DelayPolicy::fixed(3);
  r.totals.wall_ms = 123.456;
  r.totals.accepted_iterations = 1000;
  r.totals.rounds = 14;
  r.totals.planned_rounds = 14;
  r.totals.final_test_rmse = 0.0123;
  r.conservation_ok = true;
  return r;
}

TEST(Rmse, KnownValue) {
  const std::vector<double> p{1.0, 2.0, 3.0}, a{1.0, 4.0, 0.0};
  EXPECT_DOUBLE_EQ(rmse(p, a), std::sqrt(13.0 / 3.0));
  EXPECT_THROW(rmse(p, std::vector<double>{1.0}), ArgumentError);
  EXPECT_THROW(rmse({}, {}), ArgumentError);
  EXPECT_EQ(rmse(p, p), 0.0);
  EXPECT_EQ(rmse(p, a), rmse(a, p));
}

TEST(ExtremePrf, CountsAndUndefinedFlags) {
  using L = IndicatorLabel;
  const std::vector<L> pred{L::right, L::right, L::normal, L::left, L::right};
  const std::vector<L> act{L::right, L::normal, L::right, L::left, L::right};
  const auto r = extreme_prf(pred, act);
  EXPECT_EQ(r.true_positive, 2u);
  EXPECT_EQ(r.false_positive, 1u);
  EXPECT_EQ(r.false_negative, 1u);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.f1, 2.0 / 3.0);

  const std::vector<L> none{L::normal, L::left};
  const auto z = extreme_prf(none, none);
  EXPECT_TRUE(z.precision_undefined);
  EXPECT_TRUE(z.recall_undefined);
  EXPECT_EQ(z.f1, 0.0);
}

TEST(Report, WriteParseRoundTrip) {
  auto r = sample_report();
  std::stringstream ss;
  write_report(ss, r);
  const auto s = parse_report(ss);
  EXPECT_TRUE(s.key == r.key);
  EXPECT_EQ(s.clients, 2u);
  EXPECT_EQ(s.total_wall_ms, 123.456);
  EXPECT_EQ(s.accepted_iterations, 1000u);
  EXPECT_EQ(s.rounds, 14u);
  EXPECT_EQ(s.final_test_rmse, 0.0123);

  r.totals.final_test_rmse = std::numeric_limits<double>::quiet_NaN();
  std::stringstream nan_ss;
  write_report(nan_ss, r);
  EXPECT_TRUE(std::isnan(parse_report(nan_ss).final_test_rmse));
}

TEST(Report, BaselineLinesAppear) {
  auto r = sample_report();
  r.baseline_wall_ms = 246.912;
  std::stringstream ss;
  write_report(ss, r);
  const auto kv = parse_key_values(ss);
  EXPECT_EQ(kv.at("speedup_vs_baseline"), "2");
  EXPECT_EQ(kv.at("delay"), "fixed:3");
}

TEST(Report, ParseErrors) {
  std::istringstream missing("clients = 1\n");
  EXPECT_THROW(parse_report(missing), DataError);
  std::istringstream dup("a = 1\n# note\na = 2\n");
  try {
    parse_key_values(dup);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream noeq("a 1\n");
  EXPECT_THROW(parse_key_values(noeq), ParseError);
}

TEST(Speedup, RequiresComparableRuns) {
  auto one = sample_report();
  one.clients = 1;
  one.totals.wall_ms = 300.0;
  auto two = sample_report();
  two.totals.wall_ms = 150.0;
  EXPECT_DOUBLE_EQ(speedup(two, one), 2.0);
  EXPECT_EQ(speedup(two, two), 1.0);
  two.key.seed = 7;
  EXPECT_THROW(speedup(two, one), ComparisonError);
  two = sample_report();
  two.key.hidden = 16;
  EXPECT_THROW(speedup(two, one), ComparisonError);
  two = sample_report();
  two.totals.wall_ms = 0.0;
  EXPECT_THROW(speedup(two, one), ComparisonError);
}

TEST(RoundsCsv, Schema) {
  std::vector<RoundMetrics> rows(2);
  rows[0] = {1, 10, 0.01, 10, 0.5, 0.04, 1.5, 800, 800, 0};
  rows[1] = {2, 20, 0.009, 30, 0.4, 0.03, 2.25, 800, 800, 1};
  std::ostringstream out;
  write_rounds_csv(out, rows);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "round,s_i,eta_i,cum_iters,train_loss,test_rmse,wall_ms,bytes_up,bytes_down,max_staleness");
  std::getline(in, line);
  EXPECT_EQ(line, "1,10,0.01,10,0.5,0.040000000000000001,1.500,800,800,0");
  std::getline(in, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9);
}

TEST(PredictionsCsv, Schema) {
  const std::vector<PredictionRow> rows{{0, "2015-02-02", 2000.5, 1999.25}};
  std::ostringstream out;
  write_predictions_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "index,date,actual_price,predicted_price");
  EXPECT_NE(out.str().find("0,2015-02-02,2000.5,1999.25"), std::string::npos);
}

}  // namespace
}  // namespace asyncts
