#include "secagg/comm/cluster_rng.hpp"

#include <algorithm>

namespace secagg::comm {

using net::Behavior;
using net::World;

namespace {

Digest commitment(const Bytes& salt, uint64_t value) {
  Sha256 h;
  h.update(salt);
  h.update_u64(value);
  return h.finish();
}

}  // namespace

ClusterRandomness cluster_rng(World& world, const ClusterRing& ring, uint32_t cluster,
                              uint64_t bound, uint32_t timeout_rounds, uint32_t seq_base,
                              BroadcastStrategy strategy) {
  if (bound < 2) throw std::invalid_argument("bound must be at least 2");
  if (timeout_rounds < 1) throw std::invalid_argument("timeout_rounds must be >= 1");
  const auto& members = ring.cluster(cluster);
  size_t sz = members.size();

  std::map<NodeId, std::pair<Bytes, uint64_t>> secrets;  // salt, value

  // Honest commitments first; rushing members commit afterwards, having seen
  // every honest commitment.
  std::vector<BroadcastItem> honest_items;
  std::vector<NodeId> honest_order;
  for (size_t i = 0; i < sz; ++i) {
    NodeId id = members[i];
    if (world.is_malicious(id)) continue;
    Rng& rng = world.node_rng(id);
    Bytes salt;
    rng.fill(salt, 16);
    uint64_t value = rng.below(bound);
    Digest c = commitment(salt, value);
    secrets[id] = {std::move(salt), value};
    honest_items.push_back(BroadcastItem{
        cluster, id, Bytes(c.begin(), c.end()),
        static_cast<uint32_t>(c.size())});
    honest_order.push_back(id);
  }
  auto honest_outs =
      secure_broadcast_batch(world, ring, honest_items, seq_base, strategy);

  std::vector<BroadcastItem> rush_items;
  std::vector<NodeId> rush_order;
  for (size_t i = 0; i < sz; ++i) {
    NodeId id = members[i];
    if (!world.is_malicious(id)) continue;
    Behavior b = world.behavior(id);
    if (b == Behavior::Abstain || b == Behavior::DropAll) continue;
    // The contribution may depend on all observed commitments but not on the
    // hidden values, so it cannot steer the sum.
    Sha256 h;
    h.update("rushing.contribution");
    h.update_u64(id);
    for (const auto& out : honest_outs) {
      auto v = out.canonical();
      if (v) h.update(*v);
    }
    uint64_t value = digest_to_u64(h.finish()) % bound;
    Bytes salt;
    world.adv_rng().fill(salt, 16);
    Digest c = commitment(salt, value);
    secrets[id] = {std::move(salt), value};
    rush_items.push_back(BroadcastItem{cluster, id, Bytes(c.begin(), c.end()),
                                       static_cast<uint32_t>(c.size())});
    rush_order.push_back(id);
  }
  auto rush_outs = secure_broadcast_batch(
      world, ring, rush_items, seq_base + static_cast<uint32_t>(honest_items.size()),
      strategy);

  // Reveal phase.
  uint32_t reveal_base =
      seq_base + static_cast<uint32_t>(honest_items.size() + rush_items.size());
  std::vector<BroadcastItem> reveal_items;
  std::vector<NodeId> reveal_order;
  for (NodeId id : members) {
    auto it = secrets.find(id);
    if (it == secrets.end()) continue;
    Bytes payload = it->second.first;
    put_u64(payload, it->second.second);
    reveal_items.push_back(BroadcastItem{cluster, id, std::move(payload), 0});
    reveal_order.push_back(id);
  }
  auto reveal_outs =
      secure_broadcast_batch(world, ring, reveal_items, reveal_base, strategy);

  // Evaluate one member's view, then check the rest agree.
  std::map<NodeId, std::optional<Bytes>> commits;
  for (size_t i = 0; i < honest_order.size(); ++i)
    commits[honest_order[i]] = honest_outs[i].canonical();
  for (size_t i = 0; i < rush_order.size(); ++i)
    commits[rush_order[i]] = rush_outs[i].canonical();

  ClusterRandomness result;
  result.bound = bound;
  uint64_t sum = 0;
  for (size_t i = 0; i < reveal_order.size(); ++i) {
    NodeId id = reveal_order[i];
    auto reveal = reveal_outs[i].canonical();
    auto cmt = commits[id];
    if (!reveal || !cmt) continue;
    if (reveal->size() != 16 + 8 || cmt->size() != 32) continue;
    Bytes salt(reveal->begin(), reveal->begin() + 16);
    ByteReader r(std::span(reveal->data() + 16, 8));
    uint64_t value = r.u64();
    if (value >= bound) continue;
    Digest expect = commitment(salt, value);
    if (!std::equal(expect.begin(), expect.end(), cmt->begin())) continue;
    sum = (sum + value) % bound;
    result.contributors.push_back(id);
  }
  result.value = sum;

  for (const auto& outs : {honest_outs, rush_outs, reveal_outs})
    for (const auto& o : outs)
      if (!o.consistent()) result.consistent = false;

  if (result.contributors.empty())
    throw RngFailure("no valid contribution survived the commit-reveal");
  return result;
}

}  // namespace secagg::comm
