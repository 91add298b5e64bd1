#include "asyncts/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "asyncts/error.hpp"
#include "asyncts/seed.hpp"

namespace asyncts {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Per-round bookkeeping on the server side. Only the server role touches it.
class RoundTracker {
 public:
  RoundTracker(const RoundPlan& plan, std::size_t clients) : plan_(&plan), rows_(plan.round_count()) {
    for (std::size_t pos = 0; pos < plan.round_count(); ++pos) {
      auto& row = rows_[pos];
      for (std::size_t c = 0; c < clients; ++c) row.expected += plan.client_share(plan.rounds[pos], c) > 0 ? 1 : 0;
    }
  }

  /// Returns the round position when this update completes its round.
  std::optional<std::size_t> on_applied(const ParameterServer::Applied& a) {
    const std::size_t pos = a.record.round_index - 1;
    if (pos >= rows_.size()) throw ContractError("update for a round outside the plan");
    auto& row = rows_[pos];
    ++row.received;
    row.iterations += a.record.iterations;
    row.loss_sum += a.loss_sum;
    row.bytes_up += a.bytes_up;
    row.bytes_down += a.bytes_down;
    row.max_staleness = std::max(row.max_staleness, a.record.staleness());
    if (row.received == row.expected) return pos;
    return std::nullopt;
  }

  void complete(std::size_t pos, double at_ms, double test_rmse) {
    rows_[pos].completed_ms = at_ms;
    rows_[pos].test_rmse = test_rmse;
    rows_[pos].done = true;
  }

  bool all_complete() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const Row& r) { return r.done; });
  }

  std::uint64_t expected_updates() const {
    std::uint64_t n = 0;
    for (const auto& r : rows_) n += r.expected;
    return n;
  }

  bool iterations_match_plan() const {
    for (std::size_t pos = 0; pos < rows_.size(); ++pos) {
      if (rows_[pos].iterations != plan_->rounds[pos].iterations) return false;
    }
    return true;
  }

  std::vector<RoundMetrics> metrics() const {
    std::vector<RoundMetrics> out;
    out.reserve(rows_.size());
    double horizon = 0.0;
    for (std::size_t pos = 0; pos < rows_.size(); ++pos) {
      const auto& row = rows_[pos];
      const auto& planned = plan_->rounds[pos];
      RoundMetrics m;
      m.round = planned.index;
      m.s_i = planned.iterations;
      m.eta = planned.eta;
      m.cum_iters = planned.cum_start + planned.iterations;
      m.train_loss = row.iterations ? row.loss_sum / static_cast<double>(row.iterations) : 0.0;
      m.test_rmse = row.test_rmse;
      // Rounds may complete out of order under asynchrony; charge each round
      // the advance of the completion horizon so the column sums to the run.
      const double next = std::max(horizon, row.completed_ms);
      m.wall_ms = next - horizon;
      horizon = next;
      m.bytes_up = row.bytes_up;
      m.bytes_down = row.bytes_down;
      m.max_staleness = row.max_staleness;
      out.push_back(m);
    }
    return out;
  }

 private:
  struct Row {
    std::size_t expected = 0;
    std::size_t received = 0;
    std::uint64_t iterations = 0;
    double loss_sum = 0.0;
    std::uint64_t bytes_up = 0;
    std::uint64_t bytes_down = 0;
    std::uint64_t max_staleness = 0;
    double completed_ms = 0.0;
    double test_rmse = std::numeric_limits<double>::quiet_NaN();
    bool done = false;
  };

  const RoundPlan* plan_;
  std::vector<Row> rows_;
};

struct RunContext {
  const ExperimentConfig& cfg;
  const RoundPlan& plan;
  std::span<const NormalizedWindow> test;
  ParameterServer& server;
  std::vector<ClientWorker>& workers;
  RoundTracker& tracker;
  std::vector<ParameterVector>& round_params;
  Clock::time_point start;

  double score(const ParameterVector& params) const {
    if (!cfg.evaluate_rounds || test.empty()) return std::numeric_limits<double>::quiet_NaN();
    return evaluate_rmse(params, cfg.network, test);
  }

  void record_completion(std::size_t pos, double at_ms, const ParameterVector& params) {
    tracker.complete(pos, at_ms, score(params));
    if (cfg.record_round_params) round_params[pos] = params;
  }
};

void run_deterministic(RunContext& ctx) {
  const auto& plan = ctx.plan;
  const std::size_t n = ctx.cfg.clients;
  const std::size_t rounds = plan.round_count();

  struct SimClient {
    std::size_t pos = 0;
    std::uint64_t ready_at = 0;
    bool busy = false;
    std::uint64_t finish_at = 0;
    std::optional<ClientUpdate> update;
    std::mt19937_64 jitter_rng;
  };
  std::vector<SimClient> sim(n);
  const auto skip_empty = [&](std::size_t c) {
    auto& s = sim[c];
    while (s.pos < rounds && plan.client_share(plan.rounds[s.pos], c) == 0) ++s.pos;
  };
  for (std::size_t c = 0; c < n; ++c) {
    sim[c].jitter_rng.seed(derive_seed(ctx.cfg.seed, streams::jitter, c));
    skip_empty(c);
  }

  std::uint64_t now = 0;
  while (true) {
    // Admit pulls from ready clients in (ready time, id) order.
    std::vector<std::size_t> ready;
    for (std::size_t c = 0; c < n; ++c) {
      if (!sim[c].busy && sim[c].pos < rounds && sim[c].ready_at <= now) ready.push_back(c);
    }
    std::sort(ready.begin(), ready.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(sim[a].ready_at, a) < std::tie(sim[b].ready_at, b);
    });
    for (std::size_t c : ready) {
      if (!ctx.server.may_pull()) break;
      auto& s = sim[c];
      const auto& round = plan.rounds[s.pos];
      const std::uint64_t share = plan.client_share(round, c);
      auto snap = ctx.server.pull(c);
      s.update = ctx.workers[c].client_round(round, share, snap.params);
      std::uint64_t jitter = 0;
      if (ctx.cfg.jitter_us > 0) {
        jitter = std::uniform_int_distribution<std::uint64_t>(0, ctx.cfg.jitter_us)(s.jitter_rng);
      }
      s.busy = true;
      s.finish_at = now + share * kVirtualIterationUs + jitter;
    }

    std::uint64_t next = std::numeric_limits<std::uint64_t>::max();
    bool pending = false;
    for (const auto& s : sim) {
      if (s.busy) {
        next = std::min(next, s.finish_at);
        pending = true;
      } else if (s.pos < rounds) {
        pending = true;
        if (s.ready_at > now) next = std::min(next, s.ready_at);
      }
    }
    if (!pending) break;
    if (next == std::numeric_limits<std::uint64_t>::max()) {
      throw ContractError("deterministic executor stalled: clients wait on pulls with no update in flight (" +
                          std::to_string(ctx.server.held()) + " held)");
    }
    now = next;
    for (std::size_t c = 0; c < n; ++c) {
      auto& s = sim[c];
      if (!s.busy || s.finish_at != now) continue;
      for (const auto& applied : ctx.server.submit(std::move(*s.update))) {
        if (const auto pos = ctx.tracker.on_applied(applied)) {
          ctx.record_completion(*pos, elapsed_ms(ctx.start), ctx.server.state().params);
        }
      }
      s.update.reset();
      s.busy = false;
      s.ready_at = now;
      ++s.pos;
      skip_empty(c);
    }
  }
}

void run_threaded(RunContext& ctx) {
  const auto& plan = ctx.plan;
  const std::size_t n = ctx.cfg.clients;

  std::mutex m;
  std::condition_variable cv_server;
  std::condition_variable cv_clients;
  std::deque<ClientUpdate> arrivals;
  std::size_t active = n;
  bool abort = false;
  std::exception_ptr error;

  const auto fail = [&](std::exception_ptr e) {
    std::lock_guard lk(m);
    if (!error) error = std::move(e);
    abort = true;
    cv_server.notify_all();
    cv_clients.notify_all();
  };

  const auto client_main = [&](std::size_t c) {
    try {
      std::mt19937_64 jitter_rng(derive_seed(ctx.cfg.seed, streams::jitter, c));
      for (const auto& round : plan.rounds) {
        const std::uint64_t share = plan.client_share(round, c);
        if (share == 0) continue;
        ParameterServer::Snapshot snap;
        {
          std::unique_lock lk(m);
          cv_clients.wait(lk, [&] { return abort || (!ctx.server.holds_snapshot(c) && ctx.server.may_pull()); });
          if (abort) break;
          snap = ctx.server.pull(c);
        }
        auto upd = ctx.workers[c].client_round(round, share, snap.params);
        if (ctx.cfg.jitter_us > 0) {
          const auto us = std::uniform_int_distribution<std::uint64_t>(0, ctx.cfg.jitter_us)(jitter_rng);
          std::this_thread::sleep_for(std::chrono::microseconds(us));
        }
        {
          std::lock_guard lk(m);
          arrivals.push_back(std::move(*upd));
        }
        cv_server.notify_one();
      }
    } catch (...) {
      fail(std::current_exception());
    }
    std::lock_guard lk(m);
    --active;
    cv_server.notify_one();
  };

  std::vector<std::jthread> threads;
  threads.reserve(n);
  for (std::size_t c = 0; c < n; ++c) threads.emplace_back(client_main, c);

  struct Completion {
    std::size_t pos;
    double at_ms;
    ParameterVector params;
  };
  try {
    std::unique_lock lk(m);
    while (true) {
      cv_server.wait(lk, [&] { return abort || !arrivals.empty() || active == 0; });
      if (abort) break;
      if (arrivals.empty()) break;  // active == 0
      ClientUpdate upd = std::move(arrivals.front());
      arrivals.pop_front();
      std::vector<Completion> done;
      for (const auto& applied : ctx.server.submit(std::move(upd))) {
        if (const auto pos = ctx.tracker.on_applied(applied)) {
          done.push_back({*pos, elapsed_ms(ctx.start), ctx.server.state().params});
        }
      }
      cv_clients.notify_all();
      if (!done.empty()) {
        lk.unlock();
        for (auto& d : done) ctx.record_completion(d.pos, d.at_ms, d.params);
        lk.lock();
      }
    }
  } catch (...) {
    fail(std::current_exception());
  }
  threads.clear();  // join
  if (error) std::rethrow_exception(error);
  if (ctx.server.held() > 0) {
    throw ContractError("threaded executor finished with " + std::to_string(ctx.server.held()) + " held updates");
  }
}

}  // namespace

std::string to_string(Executor e) { return e == Executor::threaded ? "threaded" : "deterministic"; }

Executor parse_executor(std::string_view text) {
  if (text == "threaded") return Executor::threaded;
  if (text == "deterministic") return Executor::deterministic;
  throw ArgumentError("executor must be 'threaded' or 'deterministic', got '" + std::string(text) + "'");
}

std::span<const NormalizedWindow> client_shard(std::span<const NormalizedWindow> train, std::size_t client,
                                               std::size_t clients, bool share_data) {
  if (share_data) return train;
  if (train.size() < clients) throw ConfigError("fewer training windows than clients; cannot shard");
  const std::size_t begin = train.size() * client / clients;
  const std::size_t end = train.size() * (client + 1) / clients;
  return train.subspan(begin, end - begin);
}

std::vector<double> predict_all(const ParameterVector& params, const NetworkConfig& cfg,
                                std::span<const NormalizedWindow> windows) {
  ForwardCache cache;
  std::vector<double> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(forward(params, w.inputs, cfg, cache));
  return out;
}

double evaluate_rmse(const ParameterVector& params, const NetworkConfig& cfg,
                     std::span<const NormalizedWindow> windows) {
  const auto pred = predict_all(params, cfg, windows);
  return rmse(pred, targets_of(windows));
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::span<const NormalizedWindow> train,
                                std::span<const NormalizedWindow> test) {
  cfg.network.validate();
  if (cfg.clients < 1) throw ConfigError("dist.nodes must be at least 1");
  if (train.empty()) throw ConfigError("no training windows");
  const RoundPlan plan = build_round_plan(cfg.budget, cfg.sample, cfg.step, cfg.clients);

  ParameterVector init = init_params(cfg.network, derive_seed(cfg.seed, streams::init));
  ParameterServer server(std::move(init), cfg.mode, cfg.delay, cfg.clients);
  std::vector<ClientWorker> workers;
  workers.reserve(cfg.clients);
  for (std::size_t c = 0; c < cfg.clients; ++c) {
    workers.emplace_back(c, cfg.network, client_shard(train, c, cfg.clients, cfg.share_data), cfg.mode, cfg.evl,
                         derive_seed(cfg.seed, streams::client, c));
  }
  RoundTracker tracker(plan, cfg.clients);
  std::vector<ParameterVector> round_params(cfg.record_round_params ? plan.round_count() : 0);
  RunContext ctx{cfg, plan, test, server, workers, tracker, round_params, Clock::now()};

  if (cfg.executor == Executor::deterministic) run_deterministic(ctx);
  else run_threaded(ctx);

  ExperimentReport report;
  report.config_echo = cfg.echo;
  report.key.budget = cfg.budget;
  report.key.sample = cfg.sample;
  report.key.step = cfg.step;
  report.key.lstm_layers = cfg.network.lstm_layers;
  report.key.hidden = cfg.network.hidden_dim;
  report.key.fc_dims = cfg.network.fc_dims;
  report.key.window = train.front().inputs.size() / cfg.network.input_dim;
  report.key.seed = cfg.seed;
  report.clients = cfg.clients;
  report.mode = cfg.mode;
  report.delay = cfg.delay;
  report.rounds = tracker.metrics();
  report.final_state = server.state();
  report.round_params = std::move(round_params);

  auto& t = report.totals;
  for (const auto& r : report.rounds) {
    t.wall_ms += r.wall_ms;
    t.bytes_up += r.bytes_up;
    t.bytes_down += r.bytes_down;
    t.max_staleness = std::max(t.max_staleness, r.max_staleness);
  }
  t.accepted_iterations = report.final_state.applied_iterations;
  t.updates = report.final_state.update_log.size();
  t.rounds = tracker.all_complete() ? plan.round_count() : 0;
  t.planned_rounds = plan.round_count();
  t.budget = cfg.budget;
  t.final_train_loss = report.rounds.empty() ? 0.0 : report.rounds.back().train_loss;
  t.final_test_rmse = test.empty() ? std::numeric_limits<double>::quiet_NaN()
                                   : evaluate_rmse(report.final_state.params, cfg.network, test);

  report.conservation_ok = t.accepted_iterations == cfg.budget && t.rounds == plan.round_count() &&
                           t.updates == tracker.expected_updates() && tracker.iterations_match_plan();
  if (!report.conservation_ok) {
    throw ContractError("conservation audit failed: accepted " + std::to_string(t.accepted_iterations) +
                        " of K=" + std::to_string(cfg.budget) + " iterations over " + std::to_string(t.rounds) +
                        " of " + std::to_string(plan.round_count()) + " rounds");
  }
  report.audit = audit_delay_consistency(report.final_state, cfg.delay);
  return report;
}

}  // namespace asyncts
