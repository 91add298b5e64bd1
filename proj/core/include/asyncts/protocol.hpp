#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "asyncts/data.hpp"
#include "asyncts/network.hpp"
#include "asyncts/schedule.hpp"

namespace asyncts {

enum class ExchangeMode { model, gradient };

std::string to_string(ExchangeMode mode);
ExchangeMode parse_exchange_mode(std::string_view text);

/// Delay function tau(t), t = cumulative applied iterations.
struct DelayPolicy {
  enum class Kind { none, fixed, sqrt_log };

  Kind kind = Kind::none;
  std::uint64_t d = 0;  ///< fixed bound
  double c = 1.0;       ///< sqrt_log coefficient

  static DelayPolicy none() { return {}; }
  static DelayPolicy fixed(std::uint64_t d) { return {Kind::fixed, d, 1.0}; }
  static DelayPolicy sqrt_log(double c = 1.0) { return {Kind::sqrt_log, 0, c}; }

  /// `none`, `fixed:<d>`, `sqrt_log` or `sqrt_log:<c>`.
  static DelayPolicy parse(std::string_view text);
  std::string to_string() const;

  /// Largest admissible staleness in server versions; UINT64_MAX when unbounded.
  /// sqrt_log evaluates ceil(c * sqrt(t / ln(t + 2))).
  std::uint64_t tau(std::uint64_t t) const;

  friend bool operator==(const DelayPolicy&, const DelayPolicy&) = default;
};

struct ClientUpdate {
  std::size_t client_id = 0;
  std::uint64_t base_version = 0;
  std::uint64_t round_index = 0;
  std::uint64_t iterations_done = 0;
  ExchangeMode payload_kind = ExchangeMode::model;
  ParameterVector payload;
  std::size_t bytes = 0;
  double eta = 0.0;       ///< step size the round ran with
  double loss_sum = 0.0;  ///< sum of per-step training losses
};

struct UpdateRecord {
  std::uint64_t version = 0;  ///< server version after this update
  std::size_t client_id = 0;
  std::uint64_t base_version = 0;
  std::uint64_t round_index = 0;
  std::uint64_t iterations = 0;
  std::uint64_t applied_iterations_before = 0;  ///< t at application time

  std::uint64_t staleness() const { return version - 1 - base_version; }
};

struct GlobalModelState {
  ParameterVector params;
  std::uint64_t version = 0;
  std::uint64_t applied_iterations = 0;
  std::vector<UpdateRecord> update_log;

  explicit GlobalModelState(ParameterVector initial = {}) : params(std::move(initial)) {}
};

enum class GateDecision { pass, hold };

/// pass iff (server version - base version) <= tau(t).
GateDecision delay_gate(const GlobalModelState& state, const ClientUpdate& upd, const DelayPolicy& policy,
                        std::uint64_t t);

/// mode=model: global = (1 - 1/n) global + (1/n) payload.
/// mode=gradient: global -= eta * payload / n.
/// Bumps the version and appends to the update log.
void apply_update(GlobalModelState& state, const ClientUpdate& upd, ExchangeMode mode, std::size_t clients);

struct AuditResult {
  bool ok = true;
  std::optional<UpdateRecord> violation;
  std::string reason;
};

/// Replays the update log and checks that every applied update was computed
/// from a model that already held all updates through t - tau(t), that
/// versions are contiguous (no double counting) and that t is consistent.
AuditResult audit_delay_consistency(const GlobalModelState& state, const DelayPolicy& policy);

/// One client's private model state, sample stream and scratch buffers.
class ClientWorker {
 public:
  ClientWorker(std::size_t id, const NetworkConfig& network, std::span<const NormalizedWindow> shard,
               ExchangeMode mode, std::optional<EvlContext> evl, std::uint64_t sampling_seed);

  std::size_t id() const { return id_; }

  /// Runs `iterations` local SGD steps from `snapshot` with the round's step
  /// size. Returns nothing when `iterations` is 0.
  std::optional<ClientUpdate> client_round(const PlannedRound& round, std::uint64_t iterations,
                                           const ParameterVector& snapshot);

 private:
  std::size_t id_;
  const NetworkConfig* network_;
  std::span<const NormalizedWindow> shard_;
  ExchangeMode mode_;
  std::optional<EvlContext> evl_;
  std::mt19937_64 rng_;
  ForwardCache cache_;
  ParameterVector grad_;
};

/// Index of the next training window a client draws: uniform over the shard.
std::size_t draw_sample(std::mt19937_64& rng, std::size_t shard_size);

/// Server role. Not thread-safe; executors serialize access.
///
/// Besides the per-update delay gate the server admits pulls only while the
/// bound can still be met: with F the set of outstanding snapshots, a pull is
/// granted iff max over F of (version - base) + |F| <= tau(t). Since every
/// outstanding client is then at most |F| - 1 applications away from its own
/// push, each update passes the gate on arrival, and an empty F always admits
/// a pull, so bounded-delay runs cannot deadlock.
class ParameterServer {
 public:
  struct Snapshot {
    ParameterVector params;
    std::uint64_t base_version;
  };

  struct Applied {
    UpdateRecord record;
    double loss_sum;
    std::size_t bytes_up;
    std::size_t bytes_down;
  };

  ParameterServer(ParameterVector initial, ExchangeMode mode, DelayPolicy policy, std::size_t clients);

  bool may_pull() const;
  Snapshot pull(std::size_t client);

  /// Gates the arriving update; applies it or holds it. Held updates are
  /// re-checked after every application.
  std::vector<Applied> submit(ClientUpdate&& upd);

  const GlobalModelState& state() const { return state_; }
  GlobalModelState& state() { return state_; }
  std::size_t outstanding() const { return outstanding_.size(); }
  bool holds_snapshot(std::size_t client) const { return outstanding_.count(client) != 0; }
  std::size_t held() const { return held_.size(); }
  const DelayPolicy& policy() const { return policy_; }

 private:
  Applied apply(ClientUpdate&& upd);

  GlobalModelState state_;
  ExchangeMode mode_;
  DelayPolicy policy_;
  std::size_t clients_;
  std::map<std::size_t, std::uint64_t> outstanding_;  // client -> base version
  std::vector<ClientUpdate> held_;
};

}  // namespace asyncts
