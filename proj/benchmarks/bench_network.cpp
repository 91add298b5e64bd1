#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "asyncts/network.hpp"
#include "asyncts/schedule.hpp"

namespace {

using namespace asyncts;

NetworkConfig net(std::size_t hidden) {
  NetworkConfig cfg;
  cfg.hidden_dim = hidden;
  cfg.lambda = 1e-3;
  return cfg;
}

std::vector<double> window(std::size_t w) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 0.02);
  std::vector<double> x(w);
  for (auto& v : x) v = d(rng);
  return x;
}

void BM_Forward(benchmark::State& state) {
  const auto cfg = net(static_cast<std::size_t>(state.range(0)));
  const auto params = init_params(cfg, 1);
  const auto x = window(20);
  ForwardCache cache;
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, x, cfg, cache));
}
BENCHMARK(BM_Forward)->Arg(8)->Arg(32)->Arg(64);

// One full SGD iteration as a client runs it.
void BM_SgdIteration(benchmark::State& state) {
  const auto cfg = net(static_cast<std::size_t>(state.range(0)));
  auto params = init_params(cfg, 1);
  const auto x = window(20);
  ForwardCache cache;
  ParameterVector grad;
  for (auto _ : state) {
    forward(params, x, cfg, cache);
    backward(cache, 0.01, params, cfg, std::nullopt, grad);
    clip_gradients(grad, 1.0);
    sgd_step(params, grad, 1e-4);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SgdIteration)->Arg(8)->Arg(32)->Arg(64);

void BM_BuildRoundPlan(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_round_plan(static_cast<std::uint64_t>(state.range(0)), {10, 1, 0}, {0.01, 0.01}, 5));
  }
}
BENCHMARK(BM_BuildRoundPlan)->Arg(288375)->Arg(10000000);

}  // namespace
