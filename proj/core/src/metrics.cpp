#include "asyncts/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <type_traits>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "asyncts/error.hpp"

namespace asyncts {
namespace {

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::string exact(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

template <typename T>
T field(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw DataError("report: missing key '" + key + "'");
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    // strtod accepts the nan and inf spellings that operator<< produces
    char* end = nullptr;
    value = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0') throw DataError("report: bad value for '" + key + "'");
  } else {
    std::istringstream is(it->second);
    if (!(is >> value) || !is.eof()) throw DataError("report: bad value for '" + key + "'");
  }
  return value;
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size()) throw ArgumentError("rmse: length mismatch");
  if (pred.empty()) throw ArgumentError("rmse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - actual[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(pred.size()));
}

PrecisionRecall extreme_prf(std::span<const IndicatorLabel> predicted, std::span<const IndicatorLabel> actual) {
  if (predicted.size() != actual.size()) throw ArgumentError("extreme_prf: length mismatch");
  PrecisionRecall r;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == IndicatorLabel::right;
    const bool a = actual[i] == IndicatorLabel::right;
    if (p && a) ++r.true_positive;
    else if (p) ++r.false_positive;
    else if (a) ++r.false_negative;
  }
  const auto pp = r.true_positive + r.false_positive;
  const auto ap = r.true_positive + r.false_negative;
  if (pp == 0) r.precision_undefined = true;
  else r.precision = static_cast<double>(r.true_positive) / static_cast<double>(pp);
  if (ap == 0) r.recall_undefined = true;
  else r.recall = static_cast<double>(r.true_positive) / static_cast<double>(ap);
  if (r.precision > 0.0 && r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

bool ComparisonKey::operator==(const ComparisonKey& o) const {
  return budget == o.budget && sample.a == o.sample.a && sample.p == o.sample.p && sample.b == o.sample.b &&
         step.eta0 == o.step.eta0 && step.beta == o.step.beta && lstm_layers == o.lstm_layers &&
         hidden == o.hidden && fc_dims == o.fc_dims && window == o.window && seed == o.seed;
}

ReportSummary summarize(const ExperimentReport& report) {
  return {report.key,
          report.clients,
          report.totals.wall_ms,
          report.totals.accepted_iterations,
          report.totals.rounds,
          report.totals.final_test_rmse};
}

double speedup(const ReportSummary& report_n, const ReportSummary& report_1) {
  if (!(report_n.key == report_1.key)) {
    throw ComparisonError("speedup: runs differ in budget, schedule, model or seed");
  }
  if (!(report_n.total_wall_ms > 0.0)) throw ComparisonError("speedup: run has no measured wall time");
  return report_1.total_wall_ms / report_n.total_wall_ms;
}

double speedup(const ExperimentReport& report_n, const ExperimentReport& report_1) {
  return speedup(summarize(report_n), summarize(report_1));
}

void write_rounds_csv(std::ostream& out, std::span<const RoundMetrics> rounds) {
  out << "round,s_i,eta_i,cum_iters,train_loss,test_rmse,wall_ms,bytes_up,bytes_down,max_staleness\n";
  for (const auto& r : rounds) {
    out << r.round << ',' << r.s_i << ',' << exact(r.eta) << ',' << r.cum_iters << ',' << exact(r.train_loss)
        << ',' << exact(r.test_rmse) << ',' << std::fixed << std::setprecision(3) << r.wall_ms
        << std::defaultfloat << ',' << r.bytes_up << ',' << r.bytes_down << ',' << r.max_staleness << '\n';
  }
}

void write_report(std::ostream& out, const ExperimentReport& report) {
  const auto& k = report.key;
  const auto& t = report.totals;
  out << "# asyncts run report\n";
  out << "clients = " << report.clients << '\n';
  out << "exchange = " << to_string(report.mode) << '\n';
  out << "delay = " << report.delay.to_string() << '\n';
  out << "budget_K = " << k.budget << '\n';
  out << "schedule_a = " << exact(k.sample.a) << '\n';
  out << "schedule_p = " << exact(k.sample.p) << '\n';
  out << "schedule_b = " << exact(k.sample.b) << '\n';
  out << "eta0 = " << exact(k.step.eta0) << '\n';
  out << "beta = " << exact(k.step.beta) << '\n';
  out << "lstm_layers = " << k.lstm_layers << '\n';
  out << "hidden = " << k.hidden << '\n';
  out << "fc_dims = " << join(k.fc_dims) << '\n';
  out << "window = " << k.window << '\n';
  out << "seed = " << k.seed << '\n';
  out << "planned_rounds = " << t.planned_rounds << '\n';
  out << "rounds = " << t.rounds << '\n';
  out << "updates = " << t.updates << '\n';
  out << "accepted_iterations = " << t.accepted_iterations << '\n';
  out << "conservation = " << (report.conservation_ok ? "ok" : "FAILED") << '\n';
  out << "delay_audit = " << (report.audit.ok ? "ok" : "FAILED: " + report.audit.reason) << '\n';
  out << "total_wall_ms = " << exact(t.wall_ms) << '\n';
  out << "bytes_up = " << t.bytes_up << '\n';
  out << "bytes_down = " << t.bytes_down << '\n';
  out << "max_staleness = " << t.max_staleness << '\n';
  out << "final_train_loss = " << exact(t.final_train_loss) << '\n';
  out << "final_test_rmse = " << exact(t.final_test_rmse) << '\n';
  if (report.baseline_wall_ms) {
    out << "baseline_wall_ms = " << exact(*report.baseline_wall_ms) << '\n';
    out << "speedup_vs_baseline = " << exact(*report.baseline_wall_ms / t.wall_ms) << '\n';
  }
  if (!report.config_echo.empty()) {
    out << "# resolved config\n";
    std::istringstream lines(report.config_echo);
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  }
}

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    if (!kv.emplace(key, value).second) throw ParseError(source, line_no, "duplicate key '" + key + "'");
  }
  return kv;
}

ReportSummary parse_report(std::istream& in) {
  const auto kv = parse_key_values(in, "report");
  ReportSummary s;
  s.key.budget = field<std::uint64_t>(kv, "budget_K");
  s.key.sample.a = field<double>(kv, "schedule_a");
  s.key.sample.p = field<double>(kv, "schedule_p");
  s.key.sample.b = field<double>(kv, "schedule_b");
  s.key.step.eta0 = field<double>(kv, "eta0");
  s.key.step.beta = field<double>(kv, "beta");
  s.key.lstm_layers = field<std::size_t>(kv, "lstm_layers");
  s.key.hidden = field<std::size_t>(kv, "hidden");
  {
    std::istringstream is(field<std::string>(kv, "fc_dims"));
    std::string part;
    while (std::getline(is, part, ',')) {
      std::size_t d = 0;
      const auto* end = part.data() + part.size();
      if (std::from_chars(part.data(), end, d).ptr != end || part.empty()) {
        throw DataError("report: bad value for 'fc_dims'");
      }
      s.key.fc_dims.push_back(d);
    }
  }
  s.key.window = field<std::size_t>(kv, "window");
  s.key.seed = field<std::uint64_t>(kv, "seed");
  s.clients = field<std::size_t>(kv, "clients");
  s.total_wall_ms = field<double>(kv, "total_wall_ms");
  s.accepted_iterations = field<std::uint64_t>(kv, "accepted_iterations");
  s.rounds = field<std::uint64_t>(kv, "rounds");
  s.final_test_rmse = field<double>(kv, "final_test_rmse");
  return s;
}

void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows) {
  out << "index,date,actual_price,predicted_price\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.index << ',' << r.date << ',' << r.actual_price << ',' << r.predicted_price << '\n';
  }
}

}  // namespace asyncts
