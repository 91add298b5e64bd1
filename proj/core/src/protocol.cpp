#include "asyncts/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "asyncts/error.hpp"

namespace asyncts {
namespace {

constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

}  // namespace

std::string to_string(ExchangeMode mode) { return mode == ExchangeMode::model ? "model" : "gradient"; }

ExchangeMode parse_exchange_mode(std::string_view text) {
  if (text == "model") return ExchangeMode::model;
  if (text == "gradient") return ExchangeMode::gradient;
  throw ArgumentError("exchange mode must be 'model' or 'gradient', got '" + std::string(text) + "'");
}

DelayPolicy DelayPolicy::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (name == "none" && colon == std::string_view::npos) return none();
  if (name == "fixed" && !arg.empty()) {
    std::uint64_t d = 0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), d);
    if (ec == std::errc{} && ptr == arg.data() + arg.size()) return fixed(d);
  }
  if (name == "sqrt_log") {
    if (colon == std::string_view::npos) return sqrt_log();
    double c = 0.0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), c);
    if (ec == std::errc{} && ptr == arg.data() + arg.size() && c > 0.0 && std::isfinite(c)) return sqrt_log(c);
  }
  throw ArgumentError("delay policy must be none, fixed:<d> or sqrt_log[:<c>], got '" + std::string(text) + "'");
}

std::string DelayPolicy::to_string() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::fixed: return "fixed:" + std::to_string(d);
    case Kind::sqrt_log: {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, c);
      return "sqrt_log:" + std::string(buf, ptr);
    }
  }
  return {};
}

std::uint64_t DelayPolicy::tau(std::uint64_t t) const {
  switch (kind) {
    case Kind::none: return kUnbounded;
    case Kind::fixed: return d;
    case Kind::sqrt_log: {
      const double td = static_cast<double>(t);
      return static_cast<std::uint64_t>(std::ceil(c * std::sqrt(td / std::log(td + 2.0))));
    }
  }
  return 0;
}

GateDecision delay_gate(const GlobalModelState& state, const ClientUpdate& upd, const DelayPolicy& policy,
                        std::uint64_t t) {
  if (upd.base_version > state.version) throw ContractError("delay_gate: update based on a future version");
  const std::uint64_t staleness = state.version - upd.base_version;
  return staleness <= policy.tau(t) ? GateDecision::pass : GateDecision::hold;
}

void apply_update(GlobalModelState& state, const ClientUpdate& upd, ExchangeMode mode, std::size_t clients) {
  if (clients < 1) throw ContractError("apply_update: client count must be positive");
  if (upd.payload_kind != mode) throw ContractError("apply_update: payload kind does not match exchange mode");
  if (!state.params.compatible(upd.payload)) throw ContractError("apply_update: payload shape mismatch");
  if (upd.base_version > state.version) throw ContractError("apply_update: update based on a future version");

  auto g = state.params.values();
  const auto p = upd.payload.values();
  const double n = static_cast<double>(clients);
  if (mode == ExchangeMode::model) {
    if (clients == 1) {
      std::copy(p.begin(), p.end(), g.begin());
    } else {
      const double alpha = 1.0 / n;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = (1.0 - alpha) * g[i] + alpha * p[i];
    }
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= upd.eta * p[i] / n;
  }

  UpdateRecord rec;
  rec.version = state.version + 1;
  rec.client_id = upd.client_id;
  rec.base_version = upd.base_version;
  rec.round_index = upd.round_index;
  rec.iterations = upd.iterations_done;
  rec.applied_iterations_before = state.applied_iterations;
  state.update_log.push_back(rec);
  state.version = rec.version;
  state.applied_iterations += upd.iterations_done;
  state.params.set_version(state.version);
}

AuditResult audit_delay_consistency(const GlobalModelState& state, const DelayPolicy& policy) {
  AuditResult result;
  const auto fail = [&](const UpdateRecord* rec, std::string why) {
    result.ok = false;
    if (rec) result.violation = *rec;
    result.reason = std::move(why);
    return result;
  };
  std::uint64_t t = 0;
  std::uint64_t expected = 1;
  for (const auto& rec : state.update_log) {
    if (rec.version != expected) {
      return fail(&rec, "version " + std::to_string(rec.version) + " out of sequence, expected " +
                            std::to_string(expected));
    }
    if (rec.base_version >= rec.version) return fail(&rec, "base version not older than the applied version");
    if (rec.iterations == 0) return fail(&rec, "update carries no iterations");
    if (rec.applied_iterations_before != t) {
      return fail(&rec, "logged t=" + std::to_string(rec.applied_iterations_before) + " but replay gives " +
                            std::to_string(t));
    }
    const std::uint64_t bound = policy.tau(t);
    if (rec.staleness() > bound) {
      return fail(&rec, "staleness " + std::to_string(rec.staleness()) + " exceeds tau(" + std::to_string(t) +
                            ")=" + std::to_string(bound));
    }
    t += rec.iterations;
    ++expected;
  }
  if (state.version != state.update_log.size()) return fail(nullptr, "server version differs from log length");
  if (state.applied_iterations != t) return fail(nullptr, "applied iteration count differs from log sum");
  return result;
}

std::size_t draw_sample(std::mt19937_64& rng, std::size_t shard_size) {
  std::uniform_int_distribution<std::size_t> dist(0, shard_size - 1);
  return dist(rng);
}

ClientWorker::ClientWorker(std::size_t id, const NetworkConfig& network, std::span<const NormalizedWindow> shard,
                           ExchangeMode mode, std::optional<EvlContext> evl, std::uint64_t sampling_seed)
    : id_(id), network_(&network), shard_(shard), mode_(mode), evl_(std::move(evl)), rng_(sampling_seed) {
  if (shard_.empty()) throw ContractError("client " + std::to_string(id) + " has no training data");
}

std::optional<ClientUpdate> ClientWorker::client_round(const PlannedRound& round, std::uint64_t iterations,
                                                       const ParameterVector& snapshot) {
  if (iterations == 0) return std::nullopt;
  const auto& cfg = *network_;
  ParameterVector local = snapshot;
  ParameterVector accum;
  if (mode_ == ExchangeMode::gradient) accum = ParameterVector(snapshot.layout_ptr());

  ClientUpdate upd;
  upd.client_id = id_;
  upd.base_version = snapshot.version();
  upd.round_index = round.index;
  upd.iterations_done = iterations;
  upd.payload_kind = mode_;
  upd.eta = round.eta;
  std::uint64_t step = 0;
  try {
    for (; step < iterations; ++step) {
      const auto& w = shard_[draw_sample(rng_, shard_.size())];
      const double pred = forward(local, w.inputs, cfg, cache_);
      upd.loss_sum += loss(pred, w.target, local, cfg, evl_);
      backward(cache_, w.target, local, cfg, evl_, grad_);
      clip_gradients(grad_, cfg.clip_norm);
      if (mode_ == ExchangeMode::gradient) {
        auto a = accum.values();
        const auto d = grad_.values();
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += d[i];
      }
      sgd_step(local, grad_, round.eta);
    }
  } catch (const NumericError& e) {
    throw NumericError("client " + std::to_string(id_) + ", round " + std::to_string(round.index) + ", step " +
                       std::to_string(step) + ": " + e.what());
  }
  upd.payload = mode_ == ExchangeMode::model ? std::move(local) : std::move(accum);
  upd.bytes = upd.payload.payload_bytes();
  return upd;
}

ParameterServer::ParameterServer(ParameterVector initial, ExchangeMode mode, DelayPolicy policy,
                                 std::size_t clients)
    : state_(std::move(initial)), mode_(mode), policy_(policy), clients_(clients) {
  if (clients_ < 1) throw ContractError("server needs at least one client");
  state_.version = state_.params.version();
}

bool ParameterServer::may_pull() const {
  const std::uint64_t bound = policy_.tau(state_.applied_iterations);
  if (bound == kUnbounded) return true;
  std::uint64_t worst = 0;
  for (const auto& [client, base] : outstanding_) worst = std::max(worst, state_.version - base);
  return worst + outstanding_.size() <= bound;
}

ParameterServer::Snapshot ParameterServer::pull(std::size_t client) {
  if (outstanding_.count(client) != 0) throw ContractError("client already holds an outstanding snapshot");
  if (!may_pull()) throw ContractError("pull refused: delay bound would be exceeded");
  outstanding_.emplace(client, state_.version);
  Snapshot snap{state_.params, state_.version};
  snap.params.set_version(state_.version);
  return snap;
}

ParameterServer::Applied ParameterServer::apply(ClientUpdate&& upd) {
  apply_update(state_, upd, mode_, clients_);
  outstanding_.erase(upd.client_id);
  return {state_.update_log.back(), upd.loss_sum, upd.bytes, state_.params.payload_bytes()};
}

std::vector<ParameterServer::Applied> ParameterServer::submit(ClientUpdate&& upd) {
  const auto it = outstanding_.find(upd.client_id);
  if (it == outstanding_.end() || it->second != upd.base_version) {
    throw ContractError("update from client " + std::to_string(upd.client_id) + " does not match its pull");
  }
  std::vector<Applied> out;
  if (delay_gate(state_, upd, policy_, state_.applied_iterations) == GateDecision::hold) {
    held_.push_back(std::move(upd));
    return out;
  }
  out.push_back(apply(std::move(upd)));
  for (bool progress = true; progress;) {
    progress = false;
    for (auto h = held_.begin(); h != held_.end(); ++h) {
      if (delay_gate(state_, *h, policy_, state_.applied_iterations) == GateDecision::pass) {
        ClientUpdate ready = std::move(*h);
        held_.erase(h);
        out.push_back(apply(std::move(ready)));
        progress = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace asyncts
