#pragma once

#include <deque>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include "secagg/net/adversary.hpp"
#include "secagg/net/envelope.hpp"
#include "secagg/rng.hpp"

namespace secagg::net {

struct PhaseTotals {
  uint64_t msgs = 0;
  uint64_t bytes = 0;
};

struct NodeTotals {
  uint64_t sent_msgs = 0;
  uint64_t recv_msgs = 0;
  uint64_t sent_bytes = 0;
  uint64_t recv_bytes = 0;
};

struct OpCost {
  std::string kind;
  uint64_t msgs = 0;
  uint64_t bytes = 0;
};

struct RunMetrics {
  std::map<NodeId, NodeTotals> per_node;
  std::map<uint32_t, PhaseTotals> per_phase;
  uint64_t sent_msgs = 0;
  uint64_t delivered_msgs = 0;
  uint64_t dropped_msgs = 0;
  uint64_t auth_rejections = 0;
  uint64_t sent_bytes = 0;
  std::vector<OpCost> ops;

  uint64_t phase_bytes(Phase p) const {
    auto it = per_phase.find(static_cast<uint32_t>(p));
    return it == per_phase.end() ? 0 : it->second.bytes;
  }
  uint64_t max_node_bytes() const;
  double mean_node_bytes() const;
  std::string summary() const;  // deterministic serialization for replay checks
};

struct WorldOptions {
  bool trace = false;
  bool track_recipients = false;
};

/// Deterministic synchronous-round message simulator. Envelopes sent in round
/// r are delivered in round r+1 in a canonical order. Honest-sender envelopes
/// are tamper-proof; malicious senders route through the behavior hook, which
/// may drop or mangle payloads but cannot change the sender identity.
class World {
 public:
  World(uint64_t seed, const std::vector<NodeId>& nodes, AdversaryConfig adv,
        WorldOptions opt = {});

  uint64_t seed() const { return seed_; }
  const AdversaryConfig& adversary() const { return adv_; }

  void add_node(NodeId id, Behavior b = Behavior::Honest);
  void remove_node(NodeId id);
  bool alive(NodeId id) const;
  std::vector<NodeId> live_nodes() const;

  // Simulator/orchestrator-side oracle. Honest handler logic never consults
  // the honesty of a peer.
  bool is_malicious(NodeId id) const { return adv_.is_malicious(id); }
  Behavior behavior(NodeId id) const { return adv_.behavior(id); }

  void begin_phase(Phase p, uint32_t epoch = 0);
  Phase phase() const { return phase_; }
  uint32_t epoch() const { return epoch_; }
  RoundTag make_tag(uint32_t seq) const {
    return RoundTag{epoch_, static_cast<uint32_t>(phase_), seq};
  }

  void send(Envelope env);
  std::vector<Envelope> step_round();
  void run_idle_rounds(uint32_t k);
  uint64_t round() const { return round_; }

  // Structural signature model: sign() records that `signer` vouched for the
  // statement; verify only succeeds for recorded statements. Nodes can only
  // sign as themselves (enforced by the orchestration discipline), malicious
  // nodes may sign any number of conflicting statements.
  void sign(NodeId signer, std::span<const uint8_t> statement);
  bool verify_signature(NodeId signer, std::span<const uint8_t> statement) const;

  Rng& node_rng(NodeId id);
  Rng& adv_rng() { return adv_rng_; }

  RunMetrics& metrics() { return metrics_; }
  const RunMetrics& metrics() const { return metrics_; }

  void op_begin();
  OpCost op_end(const std::string& kind);

  const std::string& trace() const { return trace_; }
  const std::map<NodeId, std::set<NodeId>>& recipients() const { return recipients_; }

 private:
  bool transport_coin(const char* label, const Envelope& env);
  void queue(Envelope env);

  uint64_t seed_;
  AdversaryConfig adv_;
  WorldOptions opt_;
  uint64_t round_ = 0;
  Phase phase_ = Phase::Idle;
  uint32_t epoch_ = 0;
  std::set<NodeId> live_;
  std::vector<Envelope> pending_;
  std::unordered_map<NodeId, std::unordered_set<uint64_t>> signatures_;
  std::unordered_map<NodeId, std::unique_ptr<Rng>> node_rngs_;
  std::unordered_map<NodeId, std::vector<Envelope>> replay_buffer_;
  Rng adv_rng_;
  RunMetrics metrics_;
  std::string trace_;
  std::map<NodeId, std::set<NodeId>> recipients_;
  uint64_t op_msgs_ = 0;
  uint64_t op_bytes_ = 0;
};

}  // namespace secagg::net
