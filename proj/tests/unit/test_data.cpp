#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "asyncts/data.hpp"
#include "asyncts/error.hpp"
#include "fixtures.hpp"

namespace asyncts {
namespace {

TEST(Date, ParsesAndOrders) {
  const auto d = Date::parse("2014-02-28");
  EXPECT_EQ(d.year, 2014);
  EXPECT_EQ(d.month, 2u);
  EXPECT_EQ(d.day, 28u);
  EXPECT_EQ(d.to_string(), "2014-02-28");
  EXPECT_LT(Date::parse("2014-02-28"), Date::parse("2014-03-01"));
}

TEST(Date, RejectsInvalid) {
  EXPECT_THROW(Date::parse("2014-02-30"), ArgumentError);
  EXPECT_THROW(Date::parse("2014/02/01"), ArgumentError);
  EXPECT_THROW(Date::parse("14-02-01"), ArgumentError);
  EXPECT_THROW(Date::parse(""), ArgumentError);
}

TEST(ParseCsv, ReadsCloseColumnInAnyOrder) {
  std::istringstream in(
      "\xEF\xBB\xBFvolume,Close,date,Open,High,Low\n"
      "10,101.5,2012-01-04,1,1,1\n"
      "10,100.0,2012-01-03,1,1,1\n");
  const auto s = parse_csv(in, "X");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.dates[0].to_string(), "2012-01-03");  // sorted
  EXPECT_DOUBLE_EQ(s.close[0], 100.0);
  EXPECT_DOUBLE_EQ(s.close[1], 101.5);
  EXPECT_EQ(s.symbol, "X");
}

TEST(ParseCsv, ReportsLineOfMalformedRow) {
  std::istringstream in(
      "Date,Open,High,Low,Close,Volume\n"
      "2012-01-03,1,1,1,100,10\n"
      "2012-01-04,1,1,1,abc,10\n");
  try {
    parse_csv(in, "X");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseCsv, RejectsBadData) {
  {
    std::istringstream in("Date,Open,High,Low,Volume\n2012-01-03,1,1,1,10\n");
    EXPECT_THROW(parse_csv(in, "X"), DataError);
  }
  {
    std::istringstream in("Date,Open,High,Low,Close,Volume\n2012-01-03,1,1,1,-5,10\n");
    EXPECT_THROW(parse_csv(in, "X"), DataError);
  }
  {
    std::istringstream in("Date,Open,High,Low,Close,Volume\n2012-01-03,1,1,1,5,10\n2012-01-03,1,1,1,6,10\n");
    EXPECT_THROW(parse_csv(in, "X"), DataError);
  }
}

TEST(LoadCsv, MissingFileIsDataError) {
  EXPECT_THROW(load_csv("/nonexistent/file.csv", "X"), DataError);
}

TEST(LoadCsv, BundledSampleLoads) {
  const auto s = load_csv(testing::sample_csv(), "SP500");
  EXPECT_GT(s.size(), 1000u);
  for (std::size_t i = 1; i < s.size(); ++i) ASSERT_LT(s.dates[i - 1], s.dates[i]);
}

TEST(Normalize, WindowIsRelativeToFirstPrice) {
  const std::vector<double> prices{100.0, 110.0, 90.0, 120.0};
  const auto w = normalize_window(prices, 7);
  ASSERT_EQ(w.inputs.size(), 3u);
  EXPECT_DOUBLE_EQ(w.inputs[0], 0.0);
  EXPECT_NEAR(w.inputs[1], 0.1, 1e-15);
  EXPECT_NEAR(w.inputs[2], -0.1, 1e-15);
  EXPECT_NEAR(w.target, 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(w.base_price, 100.0);
  EXPECT_EQ(w.target_index(), 10u);
}

TEST(Normalize, RoundTripOnRandomPrices) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(1.0, 5000.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> prices(8);
    for (auto& p : prices) p = dist(rng);
    const auto w = normalize_window(prices);
    for (std::size_t i = 0; i < w.inputs.size(); ++i) {
      EXPECT_NEAR(denormalize(w.inputs[i], w.base_price), prices[i], 1e-9 * prices[i]);
    }
    EXPECT_NEAR(denormalize(w.target, w.base_price), prices.back(), 1e-9 * prices.back());
  }
}

TEST(Windows, CountIsPointsMinusWindow) {
  const auto s = testing::synthetic_series(50, 1);
  EXPECT_EQ(make_windows(s, 0, 50, 20).size(), 30u);
  EXPECT_EQ(make_windows(s, 10, 31, 20).size(), 1u);
  EXPECT_THROW(make_windows(s, 10, 30, 20), ConfigError);
}

TEST(Split, SegmentsAreDisjointAndCounted) {
  const auto s = load_csv(testing::sample_csv(), "SP500");
  const DateRange train{{2012, 1, 1}, {2014, 12, 31}};
  const DateRange test{{2015, 1, 1}, {2016, 12, 31}};
  const auto split = split_by_date(s, train, test, 20);
  std::size_t n_train = 0, n_test = 0;
  for (const auto& d : s.dates) {
    n_train += train.contains(d);
    n_test += test.contains(d);
  }
  EXPECT_EQ(split.train.size(), n_train - 20);
  EXPECT_EQ(split.test.size(), n_test - 20);
  for (const auto& w : split.train) ASSERT_TRUE(train.contains(s.dates[w.target_index()]));
  for (const auto& w : split.test) {
    ASSERT_TRUE(test.contains(s.dates[w.origin_index]));
    ASSERT_TRUE(test.contains(s.dates[w.target_index()]));
  }
}

TEST(Split, RejectsOverlapAndTinyRanges) {
  const auto s = load_csv(testing::sample_csv(), "SP500");
  EXPECT_THROW(split_by_date(s, {{2012, 1, 1}, {2015, 6, 1}}, {{2015, 1, 1}, {2016, 12, 31}}, 20), ConfigError);
  EXPECT_THROW(split_by_date(s, {{2012, 1, 1}, {2012, 1, 10}}, {{2015, 1, 1}, {2016, 12, 31}}, 20), ConfigError);
}

TEST(WindowsCsv, HasHeaderAndRows) {
  const auto w = testing::synthetic_windows(3, 4, 2);
  std::ostringstream out;
  write_windows_csv(out, w);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "origin_index,base_price,x_1,x_2,x_3,x_4,target");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

}  // namespace
}  // namespace asyncts
