#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "secagg/overlay/overlay.hpp"

namespace secagg::net {

using overlay::NodeId;

enum class Behavior : uint8_t {
  Honest = 0,
  DropAll,         // sends nothing at all
  DropSelective,   // drops a pseudorandom half of outgoing envelopes
  Equivocate,      // sends conflicting values to different receivers
  GarbagePayload,  // replaces outgoing payloads with random bytes
  InvalidInput,    // submits an out-of-domain input with its proof
  BadShare,        // sends a garbage decryption share
  Abstain,         // does not submit or contribute
  Replay,          // re-sends previously sent envelopes
};

const char* behavior_name(Behavior b);
Behavior behavior_from_name(const std::string& name);

/// The misbehaviors enabled for a run; the full suite by default.
std::vector<Behavior> full_misbehavior_suite();

enum class CorruptionStrategy : uint8_t { UniformRandom, TargetedCluster, JoinOrder };

/// Static corruption: fixed for the whole run.
struct AdversaryConfig {
  std::set<NodeId> malicious;
  std::map<NodeId, Behavior> behaviors;
  bool allow_forced_leave = false;

  bool is_malicious(NodeId id) const { return malicious.count(id) != 0; }
  Behavior behavior(NodeId id) const {
    auto it = behaviors.find(id);
    return it == behaviors.end() ? Behavior::Honest : it->second;
  }
};

/// Picks floor(tau_frac * n) nodes to corrupt and assigns each a behavior from
/// the pool. `nodes` is in join order (JoinOrder corrupts the latest joiners);
/// TargetedCluster exhausts the given clusters first. tau_frac beyond the
/// model bound 1/2 - epsilon is rejected unless `unsafe_override` (used by
/// counterexample experiments).
AdversaryConfig corrupt(CorruptionStrategy strategy, const std::vector<NodeId>& nodes,
                        double tau_frac, uint64_t seed,
                        const std::vector<Behavior>& pool, double epsilon,
                        bool unsafe_override = false,
                        const std::vector<std::vector<NodeId>>* clusters = nullptr,
                        const std::vector<uint32_t>* target_clusters = nullptr);

}  // namespace secagg::net
