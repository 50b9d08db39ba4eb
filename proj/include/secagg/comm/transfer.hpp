#pragma once

#include "secagg/comm/broadcast.hpp"

namespace secagg::comm {

/// What each honest member of the receiving cluster accepted, or nullopt when
/// no value reached a strict majority of the sending cluster.
struct TransferOutcome {
  std::map<NodeId, std::optional<Bytes>> accepted;

  bool consistent() const;
  std::optional<Bytes> canonical() const;
};

/// One cluster-to-cluster hop: every listed member of `from` sends its value
/// to every member of `to`; a receiver accepts v iff strictly more than
/// |from| / 2 of the envelopes carry v and the clusters are ring- or
/// finger-adjacent. Unauthorized or spoofed envelopes count as rejections.
TransferOutcome inter_cluster_transfer(net::World& world, const ClusterRing& ring,
                                       uint32_t from, uint32_t to,
                                       const std::map<NodeId, Bytes>& per_sender,
                                       uint32_t seq, uint32_t value_nominal = 0);

/// Value carried around the ring, hop by hop, starting from the members of
/// `start` (per-member initial values). cluster_value[c] is what cluster c's
/// honest members ended up accepting; start's entry is its canonical input.
struct RingForwardResult {
  std::vector<std::optional<Bytes>> cluster_value;
  std::map<NodeId, std::optional<Bytes>> per_node;
  bool consistent = true;
};

RingForwardResult ring_forward(net::World& world, const ClusterRing& ring, uint32_t start,
                               const std::map<NodeId, Bytes>& initial, uint32_t seq_base,
                               uint32_t value_nominal = 0);

/// Origin broadcasts in its own cluster, then the clusters forward the value
/// around the ring.
RingForwardResult global_broadcast(net::World& world, const ClusterRing& ring,
                                   NodeId origin, Bytes msg, uint32_t seq_base,
                                   BroadcastStrategy strategy,
                                   uint32_t value_nominal = 0);

}  // namespace secagg::comm
