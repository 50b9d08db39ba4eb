#include "secagg/comm/maintenance.hpp"

#include <algorithm>

namespace secagg::comm {

using net::Envelope;
using net::Phase;
using overlay::ClusterRing;
using overlay::Position;

namespace {

constexpr uint64_t kSeedBound = uint64_t{1} << 62;

void discard_round(net::World& world) { (void)world.step_round(); }

}  // namespace

uint32_t OverlayManager::fresh_seq(uint32_t count) {
  uint32_t base = seq_;
  seq_ += count;
  return base;
}

bool OverlayManager::join(NodeId joiner, NodeId contact) {
  if (epoch_active_) {
    pending_.emplace_back(joiner, contact);
    return false;
  }
  run_join(joiner, contact);
  return true;
}

void OverlayManager::begin_epoch() { epoch_active_ = true; }

void OverlayManager::end_epoch() {
  epoch_active_ = false;
  auto queued = std::move(pending_);
  pending_.clear();
  for (auto& [joiner, contact] : queued) run_join(joiner, contact);
}

ChurnReport OverlayManager::run_join(NodeId joiner, NodeId contact) {
  world_.begin_phase(Phase::Maintain, static_cast<uint32_t>(overlay_.epoch));
  world_.op_begin();
  ClusterRing ring = ClusterRing::from_overlay(overlay_);
  auto contact_cluster = ring.cluster_of(contact);
  if (!contact_cluster) throw overlay::NotFoundError("contact not in overlay");

  // Join request to the contact, membership back, request to the full cluster.
  Envelope req;
  req.sender = joiner;
  req.receiver = contact;
  req.tag = world_.make_tag(fresh_seq(1));
  req.payload = {0x4a};
  world_.send(req);
  discard_round(world_);

  const auto& members = ring.cluster(*contact_cluster);
  Envelope reply;
  reply.sender = contact;
  reply.receiver = joiner;
  reply.tag = world_.make_tag(fresh_seq(1));
  reply.nominal_bytes = static_cast<uint32_t>(members.size() * 8);
  world_.send(reply);
  discard_round(world_);

  uint32_t seq = fresh_seq(1);
  for (NodeId m : members) {
    Envelope r;
    r.sender = joiner;
    r.receiver = m;
    r.tag = world_.make_tag(seq);
    r.payload = {0x4a};
    world_.send(r);
  }
  discard_round(world_);

  // The contacted cluster agrees on the landing position.
  ClusterRandomness pos_seed =
      cluster_rng(world_, ring, *contact_cluster, kSeedBound,
                  /*timeout_rounds=*/1, fresh_seq(4 * members.size()), strategy_);
  Rng pos_rng(derive_seed(pos_seed.value, "join.position", joiner));
  Position pos = overlay::draw_position(overlay_, pos_rng);
  uint32_t target = overlay_.cluster_of(pos);

  // Route the insert notice to the target cluster along the Chord fingers.
  Bytes notice;
  put_u64(notice, joiner);
  put_u64(notice, pos);
  uint32_t current = *contact_cluster;
  while (current != target) {
    uint32_t g = ring.g();
    uint32_t dist = (target + g - current) % g;
    uint32_t jump = 1;
    while (jump * 2 <= dist && jump * 2 < g) jump *= 2;
    uint32_t next = (current + jump) % g;
    std::map<NodeId, Bytes> holders;
    for (NodeId m : ring.cluster(current)) holders[m] = notice;
    inter_cluster_transfer(world_, ring, current, next, holders, fresh_seq(1));
    current = next;
  }

  // The target cluster draws the eviction randomness, then the rule applies.
  // A churned-empty target cannot agree on anything; the contacted cluster's
  // seed then drives the whole rule.
  uint64_t evict_seed;
  if (ring.cluster(target).empty()) {
    evict_seed = derive_seed(pos_seed.value, "join.empty-target");
  } else {
    ClusterRandomness agreed =
        cluster_rng(world_, ring, target, kSeedBound, /*timeout_rounds=*/1,
                    fresh_seq(4 * ring.cluster(target).size()), strategy_);
    evict_seed = agreed.value;
  }
  Rng evict_rng(derive_seed(evict_seed, "join.evict", joiner));
  ChurnReport report = overlay::cuckoo_join_at(overlay_, joiner, pos, evict_rng);

  ClusterRing after = ClusterRing::from_overlay(overlay_);
  announce_moves(after, report);
  last_cost_ = world_.op_end("join");
  return report;
}

ChurnReport OverlayManager::leave(NodeId leaver) {
  world_.begin_phase(Phase::Maintain, static_cast<uint32_t>(overlay_.epoch));
  world_.op_begin();
  auto pos = overlay_.position_of(leaver);
  if (!pos) throw overlay::NotFoundError("unknown node");
  uint32_t cluster = overlay_.cluster_of(*pos);

  // Departure notice to the cluster.
  ClusterRing ring = ClusterRing::from_overlay(overlay_);
  uint32_t seq = fresh_seq(1);
  for (NodeId m : ring.cluster(cluster)) {
    if (m == leaver) continue;
    Envelope env;
    env.sender = leaver;
    env.receiver = m;
    env.tag = world_.make_tag(seq);
    env.payload = {0x4c};
    world_.send(env);
  }
  discard_round(world_);

  overlay_.erase(leaver);
  world_.remove_node(leaver);

  ClusterRing remaining = ClusterRing::from_overlay(overlay_);
  ChurnReport report;
  if (!remaining.cluster(cluster).empty()) {
    ClusterRandomness seed =
        cluster_rng(world_, remaining, cluster, kSeedBound, /*timeout_rounds=*/1,
                    fresh_seq(4 * remaining.cluster(cluster).size()), strategy_);
    Rng rng(derive_seed(seed.value, "leave.churn", leaver));
    report = overlay::leave_churn(overlay_, cluster, rng);
    ClusterRing after = ClusterRing::from_overlay(overlay_);
    announce_moves(after, report);
  }
  last_cost_ = world_.op_end("leave");
  return report;
}

ChurnReport OverlayManager::forced_leave(NodeId victim) {
  if (!world_.adversary().allow_forced_leave)
    throw std::logic_error("forced leave is disabled in this configuration");
  // No departure notice: the victim is simply gone and the cluster reacts.
  world_.begin_phase(Phase::Maintain, static_cast<uint32_t>(overlay_.epoch));
  world_.op_begin();
  auto pos = overlay_.position_of(victim);
  if (!pos) throw overlay::NotFoundError("unknown node");
  uint32_t cluster = overlay_.cluster_of(*pos);
  overlay_.erase(victim);
  world_.remove_node(victim);

  ClusterRing remaining = ClusterRing::from_overlay(overlay_);
  ChurnReport report;
  if (!remaining.cluster(cluster).empty()) {
    ClusterRandomness seed =
        cluster_rng(world_, remaining, cluster, kSeedBound, /*timeout_rounds=*/1,
                    fresh_seq(4 * remaining.cluster(cluster).size()), strategy_);
    Rng rng(derive_seed(seed.value, "leave.churn", victim));
    report = overlay::leave_churn(overlay_, cluster, rng);
    ClusterRing after = ClusterRing::from_overlay(overlay_);
    announce_moves(after, report);
  }
  last_cost_ = world_.op_end("forced_leave");
  return report;
}

void OverlayManager::announce_moves(const ClusterRing& ring_after,
                                    const ChurnReport& report) {
  // Every cluster that gained or lost a node tells its ring and finger
  // neighbors about the new composition.
  std::set<uint32_t> affected;
  for (const auto& move : report.moved)
    affected.insert(overlay_.cluster_of(move.to));
  if (report.moved.empty()) return;

  uint32_t seq = fresh_seq(1);
  for (uint32_t c : affected) {
    std::vector<uint32_t> neighbors = ring_after.fingers(c);
    for (uint32_t nb : neighbors) {
      for (NodeId from : ring_after.cluster(c)) {
        for (NodeId to : ring_after.cluster(nb)) {
          Envelope env;
          env.sender = from;
          env.receiver = to;
          env.tag = world_.make_tag(seq);
          env.nominal_bytes = 16 * static_cast<uint32_t>(report.moved.size());
          world_.send(env);
        }
      }
    }
  }
  discard_round(world_);
}

}  // namespace secagg::comm
