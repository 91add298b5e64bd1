#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <iosfwd>
#include <string>
#include <vector>

#include "asyncts/data.hpp"
#include "asyncts/experiment.hpp"
#include "asyncts/protocol.hpp"

namespace asyncts {

/// Effective run configuration. Defaults follow the reference setting:
/// W = 20, eta0 = 0.01, beta = 0.01, s_i = 10 i, K = 288375. Unless set
/// explicitly, lambda is derived as 1 / N_c once the split is loaded.
struct RunConfig {
  std::string data_path = "data/sp500_sample.csv";
  std::string data_symbol = "SP500";
  Date train_start{2012, 1, 1};
  Date train_end{2014, 12, 31};
  Date test_start{2015, 1, 1};
  Date test_end{2016, 12, 31};
  std::size_t window = 20;
  std::size_t hidden = 32;
  std::vector<std::size_t> fc_dims{16, 8, 1};
  double clip = 1.0;
  std::optional<double> lambda;  ///< L2 coefficient; unset means 1 / N_c
  double eta0 = 0.01;
  double beta = 0.01;
  double schedule_a = 10.0;
  double schedule_p = 1.0;
  double schedule_b = 0.0;
  std::uint64_t budget = 288375;
  std::size_t nodes = 1;
  ExchangeMode exchange = ExchangeMode::model;
  DelayPolicy delay;
  bool share_data = true;
  Executor executor = Executor::threaded;
  std::uint64_t jitter_us = 0;
  bool evl_enabled = false;
  double evl_gamma = 2.0;
  double evl_quantile = 0.95;
  double evl_weight = 0.1;
  bool evl_swap_betas = false;
  std::uint64_t seed = 42;

  /// Range checks; throws ConfigError naming the key.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Keys accepted by parse_config, in serialization order.
const std::vector<std::string>& config_keys();

/// Line-oriented `key = value`; `#` starts a comment. Unknown keys, bad
/// values and out-of-range values raise ConfigError naming the key.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Writes every key, defaults included, so parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& cfg);

}  // namespace asyncts
