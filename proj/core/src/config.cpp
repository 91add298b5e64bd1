#include "asyncts/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "asyncts/error.hpp"
#include "asyncts/metrics.hpp"

namespace asyncts {
namespace {

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why + " (got '" + value + "')");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) bad(key, v, "expected a number");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) bad(key, v, "expected a nonnegative integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, v, "expected true or false");
}

Date to_date(const std::string& key, const std::string& v) {
  try {
    return Date::parse(v);
  } catch (const ArgumentError& e) {
    bad(key, v, e.what());
  }
}

std::vector<std::size_t> to_dims(const std::string& key, const std::string& v) {
  std::vector<std::size_t> dims;
  std::istringstream is(v);
  std::string part;
  while (std::getline(is, part, ',')) {
    while (!part.empty() && part.front() == ' ') part.erase(part.begin());
    while (!part.empty() && part.back() == ' ') part.pop_back();
    dims.push_back(to_uint(key, part));
  }
  if (dims.empty()) bad(key, v, "expected a comma-separated list");
  return dims;
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct KeySpec {
  std::function<void(RunConfig&, const std::string&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> print;
};

const std::vector<std::pair<std::string, KeySpec>>& key_table() {
  static const std::vector<std::pair<std::string, KeySpec>> table = {
      {"data.path", {[](RunConfig& c, auto&, auto& v) { c.data_path = v; }, [](auto& c) { return c.data_path; }}},
      {"data.symbol",
       {[](RunConfig& c, auto&, auto& v) { c.data_symbol = v; }, [](auto& c) { return c.data_symbol; }}},
      {"data.train_start", {[](RunConfig& c, auto& k, auto& v) { c.train_start = to_date(k, v); },
                            [](auto& c) { return c.train_start.to_string(); }}},
      {"data.train_end", {[](RunConfig& c, auto& k, auto& v) { c.train_end = to_date(k, v); },
                          [](auto& c) { return c.train_end.to_string(); }}},
      {"data.test_start", {[](RunConfig& c, auto& k, auto& v) { c.test_start = to_date(k, v); },
                           [](auto& c) { return c.test_start.to_string(); }}},
      {"data.test_end", {[](RunConfig& c, auto& k, auto& v) { c.test_end = to_date(k, v); },
                         [](auto& c) { return c.test_end.to_string(); }}},
      {"window.size", {[](RunConfig& c, auto& k, auto& v) { c.window = to_uint(k, v); },
                       [](auto& c) { return std::to_string(c.window); }}},
      {"model.hidden", {[](RunConfig& c, auto& k, auto& v) { c.hidden = to_uint(k, v); },
                        [](auto& c) { return std::to_string(c.hidden); }}},
      {"model.fc_dims", {[](RunConfig& c, auto& k, auto& v) { c.fc_dims = to_dims(k, v); },
                         [](auto& c) {
                           std::string s;
                           for (std::size_t i = 0; i < c.fc_dims.size(); ++i) {
                             s += (i ? "," : "") + std::to_string(c.fc_dims[i]);
                           }
                           return s;
                         }}},
      {"model.clip",
       {[](RunConfig& c, auto& k, auto& v) { c.clip = to_double(k, v); }, [](auto& c) { return fmt(c.clip); }}},
      {"model.lambda", {[](RunConfig& c, auto& k, auto& v) {
                          if (v == "auto") c.lambda.reset();
                          else c.lambda = to_double(k, v);
                        },
                        [](auto& c) { return c.lambda ? fmt(*c.lambda) : std::string("auto"); }}},
      {"opt.eta0",
       {[](RunConfig& c, auto& k, auto& v) { c.eta0 = to_double(k, v); }, [](auto& c) { return fmt(c.eta0); }}},
      {"opt.beta",
       {[](RunConfig& c, auto& k, auto& v) { c.beta = to_double(k, v); }, [](auto& c) { return fmt(c.beta); }}},
      {"schedule.a", {[](RunConfig& c, auto& k, auto& v) { c.schedule_a = to_double(k, v); },
                      [](auto& c) { return fmt(c.schedule_a); }}},
      {"schedule.p", {[](RunConfig& c, auto& k, auto& v) { c.schedule_p = to_double(k, v); },
                      [](auto& c) { return fmt(c.schedule_p); }}},
      {"schedule.b", {[](RunConfig& c, auto& k, auto& v) { c.schedule_b = to_double(k, v); },
                      [](auto& c) { return fmt(c.schedule_b); }}},
      {"schedule.K", {[](RunConfig& c, auto& k, auto& v) { c.budget = to_uint(k, v); },
                      [](auto& c) { return std::to_string(c.budget); }}},
      {"dist.nodes", {[](RunConfig& c, auto& k, auto& v) { c.nodes = to_uint(k, v); },
                      [](auto& c) { return std::to_string(c.nodes); }}},
      {"dist.exchange", {[](RunConfig& c, auto& k, auto& v) {
                           try {
                             c.exchange = parse_exchange_mode(v);
                           } catch (const ArgumentError& e) {
                             bad(k, v, e.what());
                           }
                         },
                         [](auto& c) { return to_string(c.exchange); }}},
      {"dist.delay", {[](RunConfig& c, auto& k, auto& v) {
                        try {
                          c.delay = DelayPolicy::parse(v);
                        } catch (const ArgumentError& e) {
                          bad(k, v, e.what());
                        }
                      },
                      [](auto& c) { return c.delay.to_string(); }}},
      {"dist.share_data", {[](RunConfig& c, auto& k, auto& v) { c.share_data = to_bool(k, v); },
                           [](auto& c) { return std::string(c.share_data ? "true" : "false"); }}},
      {"dist.executor", {[](RunConfig& c, auto& k, auto& v) {
                           try {
                             c.executor = parse_executor(v);
                           } catch (const ArgumentError& e) {
                             bad(k, v, e.what());
                           }
                         },
                         [](auto& c) { return to_string(c.executor); }}},
      {"dist.jitter_us", {[](RunConfig& c, auto& k, auto& v) { c.jitter_us = to_uint(k, v); },
                          [](auto& c) { return std::to_string(c.jitter_us); }}},
      {"evl.enabled", {[](RunConfig& c, auto& k, auto& v) { c.evl_enabled = to_bool(k, v); },
                       [](auto& c) { return std::string(c.evl_enabled ? "true" : "false"); }}},
      {"evl.gamma", {[](RunConfig& c, auto& k, auto& v) { c.evl_gamma = to_double(k, v); },
                     [](auto& c) { return fmt(c.evl_gamma); }}},
      {"evl.quantile", {[](RunConfig& c, auto& k, auto& v) { c.evl_quantile = to_double(k, v); },
                        [](auto& c) { return fmt(c.evl_quantile); }}},
      {"evl.weight", {[](RunConfig& c, auto& k, auto& v) { c.evl_weight = to_double(k, v); },
                      [](auto& c) { return fmt(c.evl_weight); }}},
      {"evl.swap_betas", {[](RunConfig& c, auto& k, auto& v) { c.evl_swap_betas = to_bool(k, v); },
                          [](auto& c) { return std::string(c.evl_swap_betas ? "true" : "false"); }}},
      {"seed",
       {[](RunConfig& c, auto& k, auto& v) { c.seed = to_uint(k, v); }, [](auto& c) { return std::to_string(c.seed); }}},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  const auto need = [](bool ok, const char* key, const std::string& why) {
    if (!ok) throw ConfigError(std::string("config key '") + key + "': " + why);
  };
  need(!data_path.empty(), "data.path", "must not be empty");
  need(train_start <= train_end, "data.train_end", "must not precede data.train_start");
  need(test_start <= test_end, "data.test_end", "must not precede data.test_start");
  need(train_end < test_start, "data.test_start", "test range must start after the train range ends");
  need(window >= 1, "window.size", "must be at least 1");
  need(hidden >= 1, "model.hidden", "must be at least 1");
  need(!fc_dims.empty() && fc_dims.back() == 1, "model.fc_dims", "must end in 1");
  for (auto d : fc_dims) need(d >= 1, "model.fc_dims", "entries must be positive");
  need(clip >= 0.0, "model.clip", "must be nonnegative");
  need(!lambda || *lambda >= 0.0, "model.lambda", "must be nonnegative or auto");
  need(eta0 > 0.0, "opt.eta0", "must be positive");
  need(beta >= 0.0, "opt.beta", "must be nonnegative");
  need(schedule_a >= 0.0, "schedule.a", "must be nonnegative");
  need(schedule_b >= 0.0, "schedule.b", "must be nonnegative");
  need(schedule_a + schedule_b > 0.0, "schedule.b", "schedule.a + schedule.b must be positive");
  need(budget >= 1, "schedule.K", "must be at least 1");
  need(nodes >= 1, "dist.nodes", "must be at least 1");
  need(evl_gamma >= 1.0, "evl.gamma", "must be at least 1");
  need(evl_quantile > 0.5 && evl_quantile < 1.0, "evl.quantile", "must lie in (0.5, 1)");
  need(evl_weight >= 0.0, "evl.weight", "must be nonnegative");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, spec] : key_table()) k.push_back(name);
    return k;
  }();
  return keys;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> kv;
  try {
    kv = parse_key_values(in, source);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  RunConfig cfg;
  const auto& table = key_table();
  for (const auto& [key, value] : kv) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.parse(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return parse_config(in, path.string());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, spec] : key_table()) out += key + " = " + spec.print(cfg) + "\n";
  return out;
}

}  // namespace asyncts
