#pragma once

#include <optional>

#include "secagg/net/world.hpp"
#include "secagg/overlay/overlay.hpp"

namespace secagg::comm {

using overlay::ClusterRing;
using overlay::NodeId;

enum class BroadcastStrategy : uint8_t {
  // Signed echo with f+1 forwarding rounds, f = floor((s-1)/2). Consistency
  // and validity hold for any minority of faulty members.
  DolevStrong,
  // Authenticated double-echo: one echo round and a quorum threshold.
  // Cheaper, but only tolerates s > 3f.
  DoubleEcho,
};

struct BroadcastItem {
  uint32_t cluster = 0;
  NodeId sender = 0;
  Bytes value;
  uint32_t value_nominal = 0;  // metrics size of the value, 0 = actual
};

/// Output of one broadcast instance: per honest cluster member, the delivered
/// value or nullopt. All honest entries are identical whenever the cluster
/// has an honest majority.
struct BroadcastOutcome {
  std::map<NodeId, std::optional<Bytes>> delivered;

  bool consistent() const;
  std::optional<Bytes> canonical() const;  // first honest member's view
};

/// Runs a batch of intra-cluster secure broadcasts concurrently, one instance
/// per item, sharing the same delivery rounds. seq numbers are drawn from
/// [seq_base, seq_base + items.size()).
std::vector<BroadcastOutcome> secure_broadcast_batch(net::World& world,
                                                     const ClusterRing& ring,
                                                     std::span<const BroadcastItem> items,
                                                     uint32_t seq_base,
                                                     BroadcastStrategy strategy);

BroadcastOutcome secure_broadcast(net::World& world, const ClusterRing& ring,
                                  uint32_t cluster, NodeId sender, Bytes value,
                                  uint32_t seq,
                                  BroadcastStrategy strategy = BroadcastStrategy::DolevStrong);

/// Equivocation variant of a value: what a two-faced sender shows the other
/// half of its audience.
Bytes equivocate_value(const Bytes& value);

}  // namespace secagg::comm
