#include "secagg/comm/transfer.hpp"

#include <algorithm>

namespace secagg::comm {

using net::Behavior;
using net::Envelope;
using net::World;

bool TransferOutcome::consistent() const {
  const std::optional<Bytes>* first = nullptr;
  for (const auto& [id, v] : accepted) {
    if (!first) first = &v;
    else if (*first != v) return false;
  }
  return true;
}

std::optional<Bytes> TransferOutcome::canonical() const {
  if (accepted.empty()) return std::nullopt;
  return accepted.begin()->second;
}

TransferOutcome inter_cluster_transfer(World& world, const ClusterRing& ring,
                                       uint32_t from, uint32_t to,
                                       const std::map<NodeId, Bytes>& per_sender,
                                       uint32_t seq, uint32_t value_nominal) {
  const auto& senders = ring.cluster(from);
  const auto& receivers = ring.cluster(to);
  net::RoundTag tag = world.make_tag(seq);

  for (NodeId s : senders) {
    auto it = per_sender.find(s);
    if (it == per_sender.end()) continue;  // holds no value, stays silent
    bool equivocating =
        world.is_malicious(s) && world.behavior(s) == Behavior::Equivocate;
    bool flip = false;
    for (NodeId r : receivers) {
      Envelope env;
      env.sender = s;
      env.receiver = r;
      env.tag = tag;
      env.payload = (equivocating && flip) ? equivocate_value(it->second) : it->second;
      env.nominal_bytes = value_nominal;
      flip = !flip;
      world.send(std::move(env));
    }
  }

  std::map<NodeId, std::map<Bytes, uint32_t>> tallies;
  bool authorized = ring.adjacent(from, to);
  for (Envelope& env : world.step_round()) {
    if (env.tag != tag) continue;
    if (world.is_malicious(env.receiver)) continue;
    if (!std::binary_search(receivers.begin(), receivers.end(), env.receiver)) continue;
    // Accept only envelopes from known members of an authorized neighbor.
    if (!authorized || !std::binary_search(senders.begin(), senders.end(), env.sender)) {
      world.metrics().auth_rejections += 1;
      continue;
    }
    tallies[env.receiver][env.payload] += 1;
  }

  TransferOutcome out;
  uint32_t need = static_cast<uint32_t>(senders.size() / 2) + 1;  // strict majority
  for (NodeId r : receivers) {
    if (world.is_malicious(r)) continue;
    std::optional<Bytes> winner;
    auto it = tallies.find(r);
    if (it != tallies.end())
      for (const auto& [value, count] : it->second)
        if (count >= need) winner = value;
    out.accepted[r] = std::move(winner);
  }
  return out;
}

RingForwardResult ring_forward(World& world, const ClusterRing& ring, uint32_t start,
                               const std::map<NodeId, Bytes>& initial, uint32_t seq_base,
                               uint32_t value_nominal) {
  uint32_t g = ring.g();
  RingForwardResult result;
  result.cluster_value.assign(g, std::nullopt);

  std::map<NodeId, Bytes> held = initial;
  {
    // Canonical start value: what an honest member of `start` holds.
    std::optional<Bytes> canon;
    for (NodeId id : ring.cluster(start))
      if (!world.is_malicious(id) && initial.count(id)) {
        canon = initial.at(id);
        break;
      }
    result.cluster_value[start] = canon;
    for (NodeId id : ring.cluster(start)) {
      if (world.is_malicious(id)) continue;
      auto it = initial.find(id);
      result.per_node[id] = it == initial.end() ? std::nullopt
                                                : std::optional<Bytes>(it->second);
    }
  }

  for (uint32_t hop = 1; hop < g; ++hop) {
    uint32_t from = (start + hop - 1) % g;
    uint32_t to = (start + hop) % g;
    TransferOutcome out = inter_cluster_transfer(world, ring, from, to, held, seq_base + hop,
                                                 value_nominal);
    if (!out.consistent()) result.consistent = false;
    std::optional<Bytes> canon = out.canonical();
    result.cluster_value[to] = canon;

    held.clear();
    for (NodeId id : ring.cluster(to)) {
      if (world.is_malicious(id)) {
        // Omniscient members forward the canonical value; their sends go
        // through the behavior hooks anyway.
        if (canon) held[id] = *canon;
        continue;
      }
      auto it = out.accepted.find(id);
      if (it != out.accepted.end()) {
        result.per_node[id] = it->second;
        if (it->second) held[id] = *it->second;
      }
    }
  }
  return result;
}

RingForwardResult global_broadcast(World& world, const ClusterRing& ring, NodeId origin,
                                   Bytes msg, uint32_t seq_base, BroadcastStrategy strategy,
                                   uint32_t value_nominal) {
  auto cluster = ring.cluster_of(origin);
  if (!cluster) throw std::invalid_argument("origin is not in the overlay");

  BroadcastItem item{*cluster, origin, std::move(msg), value_nominal};
  auto outs = secure_broadcast_batch(world, ring, std::span(&item, 1), seq_base, strategy);
  const BroadcastOutcome& seeded = outs.front();

  std::map<NodeId, Bytes> initial;
  for (const auto& [id, v] : seeded.delivered)
    if (v) initial[id] = *v;
  if (world.is_malicious(origin)) {
    // A Byzantine origin knows its own message regardless of what it sent.
    initial[origin] = item.value;
  }
  return ring_forward(world, ring, *cluster, initial, seq_base + 1, value_nominal);
}

}  // namespace secagg::comm
