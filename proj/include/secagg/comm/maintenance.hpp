#pragma once

#include "secagg/comm/cluster_rng.hpp"
#include "secagg/comm/transfer.hpp"

namespace secagg::comm {

using overlay::ChurnReport;
using overlay::Overlay;

/// Drives the distributed join/leave rules over the simulator so maintenance
/// traffic is counted: join requests, the per-cluster randomness agreements,
/// Chord-routed insert notices, and the adjacency updates for every moved
/// node. Joins requested while an epoch is active are queued and applied when
/// the epoch closes; a leave always executes immediately.
class OverlayManager {
 public:
  OverlayManager(net::World& world, Overlay& overlay,
                 BroadcastStrategy strategy = BroadcastStrategy::DolevStrong)
      : world_(world), overlay_(overlay), strategy_(strategy) {}

  /// Returns true if the join executed, false if it was postponed.
  bool join(NodeId joiner, NodeId contact);
  ChurnReport leave(NodeId leaver);

  /// Adversary-forced departure of an honest victim; gated by configuration.
  ChurnReport forced_leave(NodeId victim);

  void begin_epoch();
  void end_epoch();  // applies postponed joins
  bool epoch_active() const { return epoch_active_; }
  size_t pending_joins() const { return pending_.size(); }

  net::OpCost last_op_cost() const { return last_cost_; }

 private:
  ChurnReport run_join(NodeId joiner, NodeId contact);
  void announce_moves(const overlay::ClusterRing& ring_after, const ChurnReport& report);
  uint32_t fresh_seq(uint32_t count);

  net::World& world_;
  Overlay& overlay_;
  BroadcastStrategy strategy_;
  bool epoch_active_ = false;
  std::vector<std::pair<NodeId, NodeId>> pending_;
  net::OpCost last_cost_;
  uint32_t seq_ = 0;
};

}  // namespace secagg::comm
