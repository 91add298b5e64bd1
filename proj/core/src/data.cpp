#include "asyncts/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "asyncts/error.hpp"

namespace asyncts {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string r(s);
  std::transform(r.begin(), r.end(), r.begin(), [](unsigned char c) { return std::tolower(c); });
  return r;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && !text.empty();
}

constexpr std::array<std::string_view, 6> kColumns{"date", "open", "high", "low", "close", "volume"};

}  // namespace

Date Date::parse(std::string_view text) {
  text = trim(text);
  Date d;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_int(text.substr(0, 4), d.year) ||
      !parse_int(text.substr(5, 2), d.month) || !parse_int(text.substr(8, 2), d.day)) {
    throw ArgumentError("malformed date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{d.month},
                                        std::chrono::day{d.day}};
  if (!ymd.ok()) throw ArgumentError("invalid calendar date '" + std::string(text) + "'");
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
  return buf;
}

RawSeries load_csv(const std::filesystem::path& path, std::string symbol) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path.string() + "'");
  return parse_csv(in, std::move(symbol), path.string());
}

RawSeries parse_csv(std::istream& in, std::string symbol, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  std::array<std::size_t, kColumns.size()> column_of{};
  std::size_t field_count = 0;

  // header: first non-empty line
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError(source_name, line_no, "missing header row");
  {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const auto header = split_fields(line);
    field_count = header.size();
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      const auto it = std::find_if(header.begin(), header.end(),
                                   [&](std::string_view h) { return lower(h) == kColumns[c]; });
      if (it == header.end()) {
        throw ParseError(source_name, line_no,
                         "header lacks column '" + std::string(kColumns[c]) +
                             "' (expected Date,Open,High,Low,Close,Volume)");
      }
      column_of[c] = static_cast<std::size_t>(it - header.begin());
    }
  }

  struct Row {
    Date date;
    double close;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != field_count) {
      throw ParseError(source_name, line_no,
                       "expected " + std::to_string(field_count) + " fields, found " + std::to_string(fields.size()));
    }
    Row row{};
    try {
      row.date = Date::parse(fields[column_of[0]]);
    } catch (const ArgumentError& e) {
      throw ParseError(source_name, line_no, e.what());
    }
    std::array<double, 5> numbers{};
    for (std::size_t c = 1; c < kColumns.size(); ++c) {
      if (!parse_double(fields[column_of[c]], numbers[c - 1])) {
        throw ParseError(source_name, line_no,
                         "column '" + std::string(kColumns[c]) + "' is not a number: '" +
                             std::string(fields[column_of[c]]) + "'");
      }
    }
    row.close = numbers[3];
    if (!std::isfinite(row.close) || row.close <= 0.0) {
      throw DataError(source_name + ":" + std::to_string(line_no) + ": close price must be finite and positive");
    }
    rows.push_back(row);
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
  RawSeries series;
  series.symbol = std::move(symbol);
  series.dates.reserve(rows.size());
  series.close.reserve(rows.size());
  for (const auto& r : rows) {
    if (!series.dates.empty() && series.dates.back() == r.date) {
      throw DataError(source_name + ": duplicate date " + r.date.to_string());
    }
    series.dates.push_back(r.date);
    series.close.push_back(r.close);
  }
  return series;
}

std::vector<NormalizedWindow> make_windows(const RawSeries& series, std::size_t begin, std::size_t end,
                                           std::size_t window) {
  if (window == 0) throw ConfigError("window size must be at least 1");
  if (end > series.size() || begin > end) throw ContractError("window segment out of range");
  const std::size_t n = end - begin;
  if (n < window + 1) {
    throw ConfigError("segment of " + std::to_string(n) + " points is shorter than window size + 1 (" +
                      std::to_string(window + 1) + ")");
  }
  std::vector<NormalizedWindow> out;
  out.reserve(n - window);
  for (std::size_t origin = begin; origin + window < end; ++origin) {
    out.push_back(normalize_window(std::span(series.close).subspan(origin, window + 1), origin));
  }
  return out;
}

DatasetSplit split_by_date(const RawSeries& series, const DateRange& train_range, const DateRange& test_range,
                           std::size_t window) {
  if (train_range.last < train_range.first) throw ConfigError("train range ends before it starts");
  if (test_range.last < test_range.first) throw ConfigError("test range ends before it starts");
  if (!(train_range.last < test_range.first)) {
    throw ConfigError("train range must end before the test range starts");
  }
  const auto segment = [&](const DateRange& r) {
    const auto lo = std::lower_bound(series.dates.begin(), series.dates.end(), r.first);
    const auto hi = std::upper_bound(series.dates.begin(), series.dates.end(), r.last);
    return std::pair{static_cast<std::size_t>(lo - series.dates.begin()),
                     static_cast<std::size_t>(hi - series.dates.begin())};
  };
  DatasetSplit split;
  split.train_range = train_range;
  split.test_range = test_range;
  split.window = window;
  const auto [tr_lo, tr_hi] = segment(train_range);
  const auto [te_lo, te_hi] = segment(test_range);
  try {
    split.train = make_windows(series, tr_lo, tr_hi, window);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("train range: ") + e.what());
  }
  try {
    split.test = make_windows(series, te_lo, te_hi, window);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("test range: ") + e.what());
  }
  return split;
}

NormalizedWindow normalize_window(std::span<const double> prices, std::size_t origin_index) {
  if (prices.size() < 2) throw ArgumentError("normalize_window needs at least two prices");
  const double base = prices.front();
  if (!std::isfinite(base) || base <= 0.0) throw DataError("window base price must be finite and positive");
  NormalizedWindow w;
  w.base_price = base;
  w.origin_index = origin_index;
  w.inputs.resize(prices.size() - 1);
  for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
    if (!std::isfinite(prices[i])) throw DataError("non-finite price in window");
    w.inputs[i] = prices[i] / base - 1.0;
  }
  if (!std::isfinite(prices.back())) throw DataError("non-finite price in window");
  w.target = prices.back() / base - 1.0;
  return w;
}

double denormalize(double value, double base_price) {
  if (!(base_price > 0.0)) throw ArgumentError("denormalize: base price must be positive");
  return base_price * (value + 1.0);
}

void write_windows_csv(std::ostream& out, std::span<const NormalizedWindow> windows) {
  const std::size_t w = windows.empty() ? 0 : windows.front().inputs.size();
  out << "origin_index,base_price";
  for (std::size_t i = 1; i <= w; ++i) out << ",x_" << i;
  out << ",target\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& win : windows) {
    out << win.origin_index << ',' << win.base_price;
    for (double x : win.inputs) out << ',' << x;
    out << ',' << win.target << '\n';
  }
}

std::vector<double> targets_of(std::span<const NormalizedWindow> windows) {
  std::vector<double> t;
  t.reserve(windows.size());
  for (const auto& w : windows) t.push_back(w.target);
  return t;
}

}  // namespace asyncts
