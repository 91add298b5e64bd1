#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "asyncts/data.hpp"
#include "asyncts/experiment.hpp"
#include "asyncts/protocol.hpp"

namespace {

using namespace asyncts;

std::vector<NormalizedWindow> windows() {
  RawSeries s;
  for (int i = 0; i < 300; ++i) {
    s.dates.push_back({2012, 1, 1});
    s.close.push_back(100.0 + 5.0 * std::sin(0.1 * i));
  }
  return make_windows(s, 0, s.size(), 20);
}

// Server-side cost of applying one model update.
void BM_ApplyModelUpdate(benchmark::State& state) {
  NetworkConfig cfg;
  cfg.hidden_dim = static_cast<std::size_t>(state.range(0));
  GlobalModelState global(init_params(cfg, 1));
  ClientUpdate upd;
  upd.payload = init_params(cfg, 2);
  upd.iterations_done = 1;
  for (auto _ : state) {
    upd.base_version = global.version;
    apply_update(global, upd, ExchangeMode::model, 4);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * upd.payload.payload_bytes()));
}
BENCHMARK(BM_ApplyModelUpdate)->Arg(8)->Arg(32);

// Whole deterministic simulation at a small budget; range(0) = clients.
void BM_DeterministicExperiment(benchmark::State& state) {
  const auto train = windows();
  ExperimentConfig cfg;
  cfg.network.hidden_dim = 8;
  cfg.budget = 5000;
  cfg.clients = static_cast<std::size_t>(state.range(0));
  cfg.executor = Executor::deterministic;
  cfg.evaluate_rounds = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg, train, {}));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * cfg.budget));
}
BENCHMARK(BM_DeterministicExperiment)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
