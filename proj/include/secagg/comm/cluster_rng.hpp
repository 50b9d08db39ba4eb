#pragma once

#include "secagg/comm/broadcast.hpp"

namespace secagg::comm {

struct RngFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Distributed randomness agreed by one cluster.
struct ClusterRandomness {
  uint64_t value = 0;
  uint64_t bound = 0;
  std::vector<NodeId> contributors;  // members whose reveal was valid
  bool consistent = true;            // all honest members computed the same value
};

/// Commit-reveal over secure broadcast: every member commits
/// hash(salt || value), then reveals; contributions that fail the commitment
/// check, land out of range, or never arrive within the broadcast horizon are
/// excluded and the survivors are added modulo `bound`. Malicious members get
/// to pick their contribution after seeing every honest commitment (the
/// strongest rushing position commit-reveal allows).
ClusterRandomness cluster_rng(net::World& world, const ClusterRing& ring,
                              uint32_t cluster, uint64_t bound, uint32_t timeout_rounds,
                              uint32_t seq_base,
                              BroadcastStrategy strategy = BroadcastStrategy::DolevStrong);

}  // namespace secagg::comm
