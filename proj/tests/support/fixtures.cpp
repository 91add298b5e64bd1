#include "fixtures.hpp"

#include <atomic>
#include <chrono>
#include <cmath>

namespace asyncts::testing {

std::filesystem::path data_dir() { return ASYNCTS_TEST_DATA_DIR; }
std::filesystem::path sample_csv() { return data_dir() / "sp500_sample.csv"; }

RawSeries synthetic_series(std::size_t n, std::uint64_t seed, Date first) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  RawSeries s;
  s.symbol = "SYN";
  const std::chrono::sys_days start{std::chrono::year{first.year} / std::chrono::month{first.month} /
                                    std::chrono::day{first.day}};
  for (std::size_t i = 0; i < n; ++i) {
    const std::chrono::year_month_day ymd{start + std::chrono::days{static_cast<long>(i)}};
    s.dates.push_back({static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day())});
    s.close.push_back(100.0 + 5.0 * std::sin(0.15 * static_cast<double>(i)) + noise(rng));
  }
  return s;
}

std::vector<NormalizedWindow> synthetic_windows(std::size_t count, std::size_t window, std::uint64_t seed) {
  const auto s = synthetic_series(count + window, seed);
  return make_windows(s, 0, s.size(), window);
}

NetworkConfig tiny_network(std::size_t hidden, std::size_t layers) {
  NetworkConfig cfg;
  cfg.hidden_dim = hidden;
  cfg.lstm_layers = layers;
  cfg.fc_dims = {3, 1};
  return cfg;
}

GradCheck check_gradients(const ParameterVector& params, std::span<const double> inputs, double target,
                          const NetworkConfig& cfg, const std::optional<EvlContext>& evl, double h,
                          double floor) {
  auto fwd = forward(params, inputs, cfg);
  const auto grad = backward(fwd.cache, target, params, cfg, evl);

  GradCheck out;
  ParameterVector probe = params;
  ForwardCache cache;
  const auto eval = [&] { return loss(forward(probe, inputs, cfg, cache), target, probe, cfg, evl); };
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = probe.values()[i];
    probe.values()[i] = orig + h;
    const double up = eval();
    probe.values()[i] = orig - h;
    const double down = eval();
    probe.values()[i] = orig;
    const double num = (up - down) / (2.0 * h);
    const double an = grad.values()[i];
    const double rel = std::abs(an - num) / std::max(std::abs(an) + std::abs(num), floor);
    if (rel > out.max_rel_error) out = {rel, i, an, num};
  }
  return out;
}

std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  auto dir = std::filesystem::temp_directory_path() /
             ("asyncts_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace asyncts::testing
