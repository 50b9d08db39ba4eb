#pragma once

#include "secagg/comm/maintenance.hpp"
#include "secagg/crypto/crypto.hpp"

namespace secagg::engine {

using overlay::ClusterRing;
using overlay::NodeId;

struct EpochConfig {
  crypto::Backend backend = crypto::Backend::Mock;
  crypto::SecurityParams sec;
  crypto::ValueDomain domain;
  uint32_t time_window = 4;  // rounds of the submission window
  comm::BroadcastStrategy strategy = comm::BroadcastStrategy::DolevStrong;
  uint64_t seed = 1;

  /// Rejects configurations whose worst-case total overflows the plaintext
  /// space (sum of n copies of the largest domain value).
  void validate(size_t n) const;
};

struct AggregationResult {
  bool ok = false;
  std::string abort_phase;  // empty when ok
  uint32_t abort_detail = 0;

  uint64_t total = 0;
  uint32_t accepted_inputs = 0;
  uint32_t excluded_inputs = 0;

  // Simulator cross-checks over honest views; always true when every cluster
  // keeps an honest majority.
  bool views_consistent = true;
  bool result_delivered_everywhere = false;

  net::RunMetrics metrics;

  // Harness-only ground truth: the dealer's key material and what each
  // cluster accepted, so tests can recompute the expected total out of band.
  crypto::PublicKey pk;
  std::vector<crypto::SecretShare> dealer_shares;
  std::vector<std::vector<std::pair<NodeId, crypto::Ciphertext>>> accepted_per_cluster;
};

/// Vote encoding for d-choice polls: choice j becomes (n_max+1)^j, so the
/// decrypted total carries per-choice counts as base-(n_max+1) digits.
uint64_t encode_vote(uint32_t choice, uint64_t n_max, uint32_t d);
std::vector<uint64_t> decode_totals(uint64_t total, uint32_t d, uint64_t n_max);
crypto::ValueDomain poll_domain(uint32_t d, uint64_t n_max);

/// The full epoch: announce, threshold setup at the last ring cluster, input
/// submission with membership proofs, per-cluster aggregation, the ring pass
/// with majority filtering, threshold decryption and result distribution.
/// `honest_inputs` maps nodes to their (already encoded) domain values; nodes
/// without an entry abstain. Malicious nodes act on their configured
/// behaviors. Deterministic given (world seed, config seed).
AggregationResult run_aggregation(net::World& world, const ClusterRing& ring,
                                  const EpochConfig& config,
                                  const std::map<NodeId, uint64_t>& honest_inputs,
                                  comm::OverlayManager* manager = nullptr);

/// Convenience entry that builds the world from the adversary config.
AggregationResult run_aggregation(const ClusterRing& ring,
                                  const std::map<NodeId, uint64_t>& honest_inputs,
                                  const net::AdversaryConfig& adv,
                                  const EpochConfig& config,
                                  net::WorldOptions opts = {});

}  // namespace secagg::engine
