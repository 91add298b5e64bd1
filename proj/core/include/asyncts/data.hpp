#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace asyncts {

struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  /// Parses `YYYY-MM-DD`; throws ArgumentError on malformed or invalid dates.
  static Date parse(std::string_view text);
  std::string to_string() const;

  friend auto operator<=>(const Date&, const Date&) = default;
};

/// Inclusive on both ends.
struct DateRange {
  Date first;
  Date last;

  bool contains(const Date& d) const { return first <= d && d <= last; }
};

/// Daily closing prices of one symbol, sorted by date.
struct RawSeries {
  std::string symbol;
  std::vector<Date> dates;
  std::vector<double> close;

  std::size_t size() const { return close.size(); }
};

/// One training sample: W window-relative inputs plus the next-step target.
struct NormalizedWindow {
  std::vector<double> inputs;
  double target = 0.0;
  double base_price = 0.0;
  std::size_t origin_index = 0;  ///< position of the base price in the RawSeries

  std::size_t target_index() const { return origin_index + inputs.size(); }
};

struct DatasetSplit {
  std::vector<NormalizedWindow> train;
  std::vector<NormalizedWindow> test;
  DateRange train_range;
  DateRange test_range;
  std::size_t window = 0;
};

/// Reads a `Date,Open,High,Low,Close,Volume` CSV. Column order is taken from
/// the header (matched case-insensitively); only Close is retained.
RawSeries load_csv(const std::filesystem::path& path, std::string symbol);
RawSeries parse_csv(std::istream& in, std::string symbol, const std::string& source_name = "<stream>");

/// Windows are built inside each date range and assigned by target date, so a
/// range holding N points yields exactly N - W windows.
DatasetSplit split_by_date(const RawSeries& series, const DateRange& train_range,
                           const DateRange& test_range, std::size_t window);

/// Windows over series positions [begin, end).
std::vector<NormalizedWindow> make_windows(const RawSeries& series, std::size_t begin,
                                           std::size_t end, std::size_t window);

/// `prices` holds W+1 values; value_i = prices_i / prices_0 - 1 and the last
/// price becomes the target.
NormalizedWindow normalize_window(std::span<const double> prices, std::size_t origin_index = 0);

double denormalize(double value, double base_price);

/// Debug export: `origin_index,base_price,x_1..x_W,target`.
void write_windows_csv(std::ostream& out, std::span<const NormalizedWindow> windows);

std::vector<double> targets_of(std::span<const NormalizedWindow> windows);

}  // namespace asyncts
