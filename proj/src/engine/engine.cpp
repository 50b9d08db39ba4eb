#include "secagg/engine/engine.hpp"

#include <algorithm>

namespace secagg::engine {

using comm::BroadcastItem;
using crypto::Backend;
using crypto::Ciphertext;
using crypto::PublicKey;
using net::Behavior;
using net::Phase;
using net::World;

namespace {

struct EpochAbort {
  std::string phase;
  uint32_t detail;
};

uint64_t plaintext_space_floor(const EpochConfig& c) {
  if (c.backend == Backend::Mock) return uint64_t{1} << 63;
  // The real modulus is at least 2^(bits-1); stay below 2^62 to keep sums in
  // uint64 territory regardless.
  uint32_t bits = std::min(62u, c.sec.modulus_bits - 1);
  return uint64_t{1} << bits;
}

Bytes announce_payload(const EpochConfig& c) {
  Bytes b = c.domain.to_bytes();
  put_u32(b, c.time_window);
  b.push_back(static_cast<uint8_t>(c.backend));
  return b;
}

struct SubmitPayload {
  Bytes ct;
  Bytes proof;
};

Bytes encode_submit(const Ciphertext& ct, const crypto::MembershipProof& proof) {
  Bytes b;
  put_bytes(b, ct.bytes());
  put_bytes(b, proof.transcript);
  return b;
}

SubmitPayload decode_submit(const Bytes& b) {
  ByteReader r(b);
  SubmitPayload p;
  p.ct = r.bytes();
  p.proof = r.bytes();
  r.expect_done();
  return p;
}

Bytes encode_share(const crypto::DecryptionShare& ds) {
  Bytes b;
  put_u32(b, ds.index);
  put_bytes(b, ds.payload);
  put_bytes(b, ds.proof.transcript);
  return b;
}

crypto::DecryptionShare decode_share(const Bytes& b) {
  ByteReader r(b);
  crypto::DecryptionShare ds;
  ds.index = r.u32();
  ds.payload = r.bytes();
  ds.proof.transcript = r.bytes();
  r.expect_done();
  return ds;
}

}  // namespace

void EpochConfig::validate(size_t n) const {
  sec.validate();
  domain.validate();
  if (n < 2) throw std::invalid_argument("need at least two nodes");
  unsigned __int128 worst =
      static_cast<unsigned __int128>(domain.max_value()) * n;
  if (worst >= plaintext_space_floor(*this))
    throw std::invalid_argument("domain maximum times n overflows the plaintext space");
}

uint64_t encode_vote(uint32_t choice, uint64_t n_max, uint32_t d) {
  if (choice >= d) throw std::invalid_argument("choice index out of range");
  unsigned __int128 base = n_max + 1, acc = 1;
  for (uint32_t i = 0; i < choice; ++i) {
    acc *= base;
    if (acc >= (unsigned __int128){1} << 62)
      throw std::invalid_argument("vote encoding overflows");
  }
  return static_cast<uint64_t>(acc);
}

std::vector<uint64_t> decode_totals(uint64_t total, uint32_t d, uint64_t n_max) {
  std::vector<uint64_t> counts(d);
  uint64_t base = n_max + 1;
  for (uint32_t j = 0; j < d; ++j) {
    counts[j] = total % base;
    total /= base;
  }
  if (total != 0) throw std::invalid_argument("total has digits beyond d choices");
  return counts;
}

crypto::ValueDomain poll_domain(uint32_t d, uint64_t n_max) {
  crypto::ValueDomain domain;
  for (uint32_t j = 0; j < d; ++j) domain.values.push_back(encode_vote(j, n_max, d));
  domain.validate();
  return domain;
}

AggregationResult run_aggregation(World& world, const ClusterRing& ring,
                                  const EpochConfig& config,
                                  const std::map<NodeId, uint64_t>& honest_inputs,
                                  comm::OverlayManager* manager) {
  config.validate(ring.all_nodes().size());
  uint32_t g = ring.g();
  if (g < 2) throw std::invalid_argument("need at least two clusters");

  AggregationResult result;
  uint32_t seq = 0;
  auto fresh_seq = [&](uint32_t count) {
    uint32_t base = seq;
    seq += count;
    return base;
  };

  auto first_honest = [&](uint32_t cluster) -> std::optional<NodeId> {
    for (NodeId id : ring.cluster(cluster))
      if (!world.is_malicious(id)) return id;
    return std::nullopt;
  };

  if (manager) manager->begin_epoch();

  try {
    // --- Announce: some honest node opens the submission window.
    world.begin_phase(Phase::Setup, 1);
    std::optional<NodeId> initiator;
    for (uint32_t c = 0; c < g && !initiator; ++c) initiator = first_honest(c);
    if (!initiator) throw EpochAbort{"announce", 0};
    Bytes announce = announce_payload(config);
    auto announced = comm::global_broadcast(world, ring, *initiator, announce,
                                            fresh_seq(g + 1), config.strategy);
    for (uint32_t c = 0; c < g; ++c) {
      if (!first_honest(c)) continue;
      if (!announced.cluster_value[c]) throw EpochAbort{"announce", c};
    }
    if (!announced.consistent) result.views_consistent = false;

    // --- Threshold setup: the last ring cluster holds the shares.
    uint32_t tc = g - 1;
    const auto& holders = ring.cluster(tc);
    uint32_t m = static_cast<uint32_t>(holders.size());
    uint32_t t = m / 2 + 1;
    if (m < 2) throw EpochAbort{"setup", tc};
    auto kg = crypto::keygen(config.backend, config.sec, t, m,
                             derive_seed(config.seed, "keygen"));
    result.pk = kg.pk;
    result.dealer_shares = kg.shares;
    std::map<NodeId, crypto::SecretShare> share_of;
    for (uint32_t i = 0; i < m; ++i) share_of[holders[i]] = kg.shares[i];

    Bytes pk_bytes = kg.pk.to_bytes();
    uint32_t pk_nominal = crypto::nominal_public_key_bytes(config.sec, m);
    std::map<NodeId, Bytes> pk_initial;
    for (NodeId id : holders) pk_initial[id] = pk_bytes;
    auto pk_spread =
        comm::ring_forward(world, ring, tc, pk_initial, fresh_seq(g), pk_nominal);
    if (!pk_spread.consistent) result.views_consistent = false;

    std::map<NodeId, PublicKey> node_pk;
    for (NodeId id : holders)
      if (!world.is_malicious(id)) node_pk.emplace(id, kg.pk);
    for (const auto& [id, bytes] : pk_spread.per_node) {
      if (node_pk.count(id) || !bytes) continue;
      try {
        node_pk.emplace(id, PublicKey::from_bytes(*bytes));
      } catch (const ParseError&) {
      }
    }
    for (uint32_t c = 0; c < g; ++c) {
      if (!first_honest(c)) continue;
      if (!pk_spread.cluster_value[c]) throw EpochAbort{"setup", c};
    }

    // Per-cluster canonical key view (honest members agree under honest
    // majority; divergence shows up in views_consistent).
    std::vector<const PublicKey*> cluster_pk(g, nullptr);
    for (uint32_t c = 0; c < g; ++c) {
      auto h = first_honest(c);
      if (h && node_pk.count(*h)) cluster_pk[c] = &node_pk.at(*h);
    }

    // --- Submission: encrypted inputs with membership proofs, broadcast
    // inside each cluster.
    world.begin_phase(Phase::Submit, 1);
    std::vector<BroadcastItem> items;
    uint32_t submit_nominal =
        4 + crypto::nominal_ciphertext_bytes(config.sec) + 4 +
        crypto::nominal_membership_proof_bytes(config.sec, config.domain.values.size());
    for (uint32_t c = 0; c < g; ++c) {
      for (NodeId id : ring.cluster(c)) {
        std::optional<uint64_t> value;
        if (world.is_malicious(id)) {
          Behavior b = world.behavior(id);
          if (b == Behavior::Abstain) continue;
          if (b == Behavior::InvalidInput) value = config.domain.max_value() + 1;
          else
            value = config.domain
                        .values[world.adv_rng().below(config.domain.values.size())];
        } else {
          auto it = honest_inputs.find(id);
          if (it == honest_inputs.end()) continue;  // abstains
          if (!config.domain.contains(it->second))
            throw std::invalid_argument("honest input outside the domain");
          value = it->second;
        }
        auto pk_it = node_pk.find(id);
        const PublicKey* pk =
            world.is_malicious(id) ? &kg.pk
                                   : (pk_it == node_pk.end() ? nullptr : &pk_it->second);
        if (!pk) continue;  // never learned the key, cannot submit
        auto [ct, proof] = crypto::prove_membership(
            *pk, *value, derive_seed(config.seed, "input", id), config.domain);
        items.push_back(BroadcastItem{c, id, encode_submit(ct, proof), submit_nominal});
      }
    }
    auto submit_outs = comm::secure_broadcast_batch(
        world, ring, items, fresh_seq(static_cast<uint32_t>(items.size())),
        config.strategy);

    result.accepted_per_cluster.assign(g, {});
    for (size_t i = 0; i < items.size(); ++i) {
      uint32_t c = items[i].cluster;
      if (!cluster_pk[c]) continue;  // no honest member to keep a view
      if (!submit_outs[i].consistent()) result.views_consistent = false;
      auto delivered = submit_outs[i].canonical();
      bool accepted = false;
      if (delivered) {
        try {
          SubmitPayload p = decode_submit(*delivered);
          Ciphertext ct = Ciphertext::deserialize(config.backend, p.ct);
          if (crypto::verify_membership(*cluster_pk[c], ct, config.domain,
                                        crypto::MembershipProof{p.proof})) {
            result.accepted_per_cluster[c].emplace_back(items[i].sender, ct);
            accepted = true;
          }
        } catch (const ParseError&) {
        }
      }
      if (accepted) result.accepted_inputs += 1;
      else result.excluded_inputs += 1;
    }

    // --- Local aggregation (computation only, no traffic).
    world.begin_phase(Phase::Local, 1);
    std::vector<std::optional<Ciphertext>> local(g);
    for (uint32_t c = 0; c < g; ++c) {
      if (!cluster_pk[c]) continue;
      auto& acc = result.accepted_per_cluster[c];
      std::sort(acc.begin(), acc.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (acc.empty()) {
        // Enc(0) under randomness every member derives from the round tag.
        Bytes tag;
        put_u32(tag, 1);
        put_u32(tag, static_cast<uint32_t>(Phase::Local));
        put_u32(tag, c);
        local[c] = crypto::encrypt(*cluster_pk[c], 0, digest_to_u64(sha256(tag)));
        continue;
      }
      Ciphertext sum = acc.front().second;
      for (size_t i = 1; i < acc.size(); ++i)
        sum = crypto::add(*cluster_pk[c], sum, acc[i].second);
      local[c] = sum;
    }

    // --- Ring pass: partial aggregates travel 0 -> 1 -> ... -> g-1.
    world.begin_phase(Phase::Ring, 1);
    uint32_t ct_nominal = crypto::nominal_ciphertext_bytes(config.sec);
    if (!local[0]) throw EpochAbort{"ring", 0};
    Bytes partial = local[0]->bytes();
    for (uint32_t hop = 1; hop < g; ++hop) {
      uint32_t from = hop - 1, to = hop;
      std::map<NodeId, Bytes> held;
      for (NodeId id : ring.cluster(from)) held[id] = partial;
      auto out = comm::inter_cluster_transfer(world, ring, from, to, held,
                                              fresh_seq(1), ct_nominal);
      if (!out.consistent()) result.views_consistent = false;
      auto accepted = out.canonical();
      if (!accepted) throw EpochAbort{"ring", hop};
      if (!cluster_pk[to]) {
        partial = *accepted;  // no honest view to add a local aggregate
        continue;
      }
      try {
        Ciphertext incoming = Ciphertext::deserialize(config.backend, *accepted);
        partial = crypto::add(*cluster_pk[to], incoming, *local[to]).bytes();
      } catch (const ParseError&) {
        throw EpochAbort{"ring", hop};
      }
    }

    // --- Threshold decryption at the last cluster.
    world.begin_phase(Phase::Decrypt, 1);
    Ciphertext global = Ciphertext::deserialize(config.backend, partial);
    std::vector<BroadcastItem> share_items;
    uint32_t share_nominal = 4 + 4 + crypto::nominal_decryption_share_bytes(config.sec) +
                             4 + crypto::nominal_share_proof_bytes(config.sec);
    for (NodeId id : holders) {
      if (world.is_malicious(id)) {
        Behavior b = world.behavior(id);
        if (b == Behavior::Abstain) continue;
        if (b == Behavior::BadShare) {
          crypto::DecryptionShare junk;
          junk.index = share_of[id].index;
          world.adv_rng().fill(junk.payload, 24);
          world.adv_rng().fill(junk.proof.transcript, 48);
          share_items.push_back(
              BroadcastItem{tc, id, encode_share(junk), share_nominal});
          continue;
        }
      }
      auto ds = crypto::share_decrypt(kg.pk, share_of[id], global,
                                      derive_seed(config.seed, "sdec", id));
      share_items.push_back(BroadcastItem{tc, id, encode_share(ds), share_nominal});
    }
    auto share_outs = comm::secure_broadcast_batch(
        world, ring, share_items, fresh_seq(static_cast<uint32_t>(share_items.size())),
        config.strategy);

    std::vector<crypto::DecryptionShare> shares;
    for (auto& out : share_outs) {
      if (!out.consistent()) result.views_consistent = false;
      auto delivered = out.canonical();
      if (!delivered) continue;
      try {
        shares.push_back(decode_share(*delivered));
      } catch (const ParseError&) {
      }
    }
    const PublicKey& decrypt_pk = cluster_pk[tc] ? *cluster_pk[tc] : kg.pk;
    try {
      result.total = crypto::combine(decrypt_pk, global, shares);
    } catch (const crypto::InsufficientSharesError&) {
      throw EpochAbort{"decrypt", tc};
    }

    // --- Result distribution around the ring.
    world.begin_phase(Phase::Result, 1);
    Bytes result_bytes;
    put_u64(result_bytes, result.total);
    put_u32(result_bytes, result.accepted_inputs);
    std::map<NodeId, Bytes> res_initial;
    for (NodeId id : holders) res_initial[id] = result_bytes;
    auto spread = comm::ring_forward(world, ring, tc, res_initial, fresh_seq(g));
    if (!spread.consistent) result.views_consistent = false;
    result.result_delivered_everywhere = true;
    for (uint32_t c = 0; c < g; ++c) {
      if (!first_honest(c)) continue;
      if (!spread.cluster_value[c] || *spread.cluster_value[c] != result_bytes)
        result.result_delivered_everywhere = false;
    }
    for (const auto& [id, v] : spread.per_node)
      if (!v || *v != result_bytes) result.result_delivered_everywhere = false;

    result.ok = true;
  } catch (const EpochAbort& abort) {
    result.ok = false;
    result.abort_phase = abort.phase;
    result.abort_detail = abort.detail;
  }

  if (manager) manager->end_epoch();
  result.metrics = world.metrics();
  return result;
}

AggregationResult run_aggregation(const ClusterRing& ring,
                                  const std::map<NodeId, uint64_t>& honest_inputs,
                                  const net::AdversaryConfig& adv,
                                  const EpochConfig& config, net::WorldOptions opts) {
  World world(config.seed, ring.all_nodes(), adv, opts);
  return run_aggregation(world, ring, config, honest_inputs, nullptr);
}

}  // namespace secagg::engine
