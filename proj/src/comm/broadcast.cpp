#include "secagg/comm/broadcast.hpp"

#include <algorithm>

namespace secagg::comm {

using net::Behavior;
using net::Envelope;
using net::World;

namespace {

constexpr uint8_t kInit = 0;
constexpr uint8_t kEcho = 1;

Bytes statement_bytes(const net::RoundTag& tag, NodeId origin, const Bytes& value) {
  Bytes s;
  put_u32(s, tag.epoch);
  put_u32(s, tag.phase);
  put_u32(s, tag.seq);
  put_u64(s, origin);
  put_bytes(s, value);
  return s;
}

struct Parsed {
  uint8_t kind;
  uint32_t instance;
  std::vector<NodeId> chain;
  Bytes value;
};

Bytes encode(uint8_t kind, uint32_t instance, std::span<const NodeId> chain,
             const Bytes& value) {
  Bytes p;
  p.push_back(kind);
  put_u32(p, instance);
  p.push_back(static_cast<uint8_t>(chain.size()));
  for (NodeId id : chain) put_u64(p, id);
  p.insert(p.end(), value.begin(), value.end());
  return p;
}

Parsed decode(const Bytes& payload) {
  ByteReader r(payload);
  Parsed out;
  out.kind = r.u8();
  out.instance = r.u32();
  uint8_t len = r.u8();
  out.chain.reserve(len);
  for (uint8_t i = 0; i < len; ++i) out.chain.push_back(r.u64());
  // Remaining bytes are the value.
  Bytes rest;
  while (!r.done()) rest.push_back(r.u8());
  out.value = std::move(rest);
  return out;
}

uint32_t payload_nominal(const Parsed& p, uint32_t value_nominal, size_t actual_value) {
  uint32_t framing = static_cast<uint32_t>(1 + 4 + 1 + 8 * p.chain.size());
  return framing + (value_nominal ? value_nominal : static_cast<uint32_t>(actual_value));
}

struct InstanceState {
  // Two extracted values are enough to conclude inconsistency.
  std::vector<Bytes> extracted;
  bool has(const Bytes& v) const {
    return std::find(extracted.begin(), extracted.end(), v) != extracted.end();
  }
};

}  // namespace

bool BroadcastOutcome::consistent() const {
  const std::optional<Bytes>* first = nullptr;
  for (const auto& [id, v] : delivered) {
    if (!first) first = &v;
    else if (*first != v) return false;
  }
  return true;
}

std::optional<Bytes> BroadcastOutcome::canonical() const {
  if (delivered.empty()) return std::nullopt;
  return delivered.begin()->second;
}

Bytes equivocate_value(const Bytes& value) {
  Bytes other = value;
  if (other.empty()) other.push_back(0x01);
  else other[0] ^= 0xff;
  return other;
}

std::vector<BroadcastOutcome> secure_broadcast_batch(World& world, const ClusterRing& ring,
                                                     std::span<const BroadcastItem> items,
                                                     uint32_t seq_base,
                                                     BroadcastStrategy strategy) {
  // Forwarding horizon: f per instance, shared round loop over the max.
  uint32_t f_max = 0;
  std::vector<uint32_t> f_inst(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    uint32_t sz = static_cast<uint32_t>(ring.cluster(items[i].cluster).size());
    f_inst[i] = strategy == BroadcastStrategy::DolevStrong ? (sz - 1) / 2 : 1;
    f_max = std::max(f_max, f_inst[i]);
  }

  // node -> instance -> state, kept per honest node only.
  std::map<NodeId, std::map<uint32_t, InstanceState>> state;
  std::map<NodeId, std::map<uint32_t, std::map<NodeId, Bytes>>> echoes;  // double echo
  std::vector<BroadcastOutcome> outcomes(items.size());

  // Initial sends.
  for (size_t i = 0; i < items.size(); ++i) {
    const BroadcastItem& item = items[i];
    const auto& members = ring.cluster(item.cluster);
    uint32_t seq = seq_base + static_cast<uint32_t>(i);
    net::RoundTag tag = world.make_tag(seq);
    NodeId origin = item.sender;

    auto send_value = [&](NodeId to, const Bytes& v) {
      Envelope env;
      env.sender = origin;
      env.receiver = to;
      env.tag = tag;
      std::vector<NodeId> chain{origin};
      env.payload = encode(kInit, static_cast<uint32_t>(i), chain, v);
      env.nominal_bytes = payload_nominal(Parsed{kInit, 0, chain, v}, item.value_nominal,
                                          v.size());
      world.send(std::move(env));
    };

    if (world.is_malicious(origin)) {
      Behavior b = world.behavior(origin);
      if (b == Behavior::Abstain) continue;  // never speaks
      if (b == Behavior::Equivocate) {
        Bytes alt = equivocate_value(item.value);
        world.sign(origin, statement_bytes(tag, origin, item.value));
        world.sign(origin, statement_bytes(tag, origin, alt));
        bool flip = false;
        for (NodeId to : members) {
          if (to == origin) continue;
          send_value(to, flip ? alt : item.value);
          flip = !flip;
        }
        continue;
      }
      // Other behaviors act at the transport layer; fall through.
    } else {
      // An honest sender delivers to itself.
      outcomes[i].delivered[origin] = item.value;
    }
    world.sign(origin, statement_bytes(tag, origin, item.value));
    for (NodeId to : members)
      if (to != origin) send_value(to, item.value);
  }

  // f_max + 1 delivery rounds; kInit/kEcho forwarding per strategy.
  for (uint32_t r = 1; r <= f_max + 1; ++r) {
    for (Envelope& env : world.step_round()) {
      if (env.tag.phase != static_cast<uint32_t>(world.phase())) continue;
      if (env.tag.seq < seq_base || env.tag.seq >= seq_base + items.size()) continue;
      if (world.is_malicious(env.receiver)) continue;  // handled by hooks only

      Parsed p;
      try {
        p = decode(env.payload);
      } catch (const ParseError&) {
        continue;
      }
      if (p.instance >= items.size()) continue;
      const BroadcastItem& item = items[p.instance];
      if (env.tag.seq != seq_base + p.instance) continue;
      const auto& members = ring.cluster(item.cluster);
      if (!std::binary_search(members.begin(), members.end(), env.receiver)) continue;
      net::RoundTag tag = world.make_tag(env.tag.seq);

      if (strategy == BroadcastStrategy::DoubleEcho) {
        if (p.kind == kInit && r == 1) {
          if (env.sender != item.sender || p.chain.size() != 1 ||
              p.chain[0] != item.sender)
            continue;
          auto& mine = echoes[env.receiver][p.instance];
          if (mine.count(env.receiver)) continue;  // already echoed
          mine.emplace(env.receiver, p.value);
          std::vector<NodeId> chain{env.receiver};
          for (NodeId to : members) {
            if (to == env.receiver) continue;
            Envelope echo;
            echo.sender = env.receiver;
            echo.receiver = to;
            echo.tag = tag;
            echo.payload = encode(kEcho, p.instance, chain, p.value);
            echo.nominal_bytes =
                payload_nominal(Parsed{kEcho, 0, chain, p.value}, item.value_nominal,
                                p.value.size());
            world.send(std::move(echo));
          }
        } else if (p.kind == kEcho && r == 2) {
          if (p.chain.size() != 1 || p.chain[0] != env.sender) continue;
          if (!std::binary_search(members.begin(), members.end(), env.sender)) continue;
          echoes[env.receiver][p.instance].emplace(env.sender, p.value);
        }
        continue;
      }

      // Dolev-Strong: a value accepted in delivery round r carries r distinct
      // member signatures starting with the origin.
      if (p.kind != kInit) continue;
      if (p.chain.size() != r) continue;
      if (p.chain[0] != item.sender) continue;
      if (p.chain.back() != env.sender) continue;
      bool ok = true;
      std::set<NodeId> distinct;
      Bytes stmt = statement_bytes(tag, item.sender, p.value);
      for (NodeId signer : p.chain) {
        if (signer == env.receiver || !distinct.insert(signer).second ||
            !std::binary_search(members.begin(), members.end(), signer) ||
            !world.verify_signature(signer, stmt)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      InstanceState& st = state[env.receiver][p.instance];
      if (st.has(p.value) || st.extracted.size() >= 2) continue;
      st.extracted.push_back(p.value);
      if (r <= f_inst[p.instance]) {
        world.sign(env.receiver, stmt);
        std::vector<NodeId> chain = p.chain;
        chain.push_back(env.receiver);
        for (NodeId to : members) {
          if (std::find(chain.begin(), chain.end(), to) != chain.end()) continue;
          Envelope fwd;
          fwd.sender = env.receiver;
          fwd.receiver = to;
          fwd.tag = tag;
          fwd.payload = encode(kInit, p.instance, chain, p.value);
          fwd.nominal_bytes = payload_nominal(Parsed{kInit, 0, chain, p.value},
                                              item.value_nominal, p.value.size());
          world.send(std::move(fwd));
        }
      }
    }
  }

  // Collect outputs for honest members.
  for (size_t i = 0; i < items.size(); ++i) {
    const BroadcastItem& item = items[i];
    for (NodeId member : ring.cluster(item.cluster)) {
      if (world.is_malicious(member)) continue;
      if (member == item.sender && !world.is_malicious(item.sender)) continue;  // set already
      std::optional<Bytes> out;
      if (strategy == BroadcastStrategy::DoubleEcho) {
        uint32_t sz = static_cast<uint32_t>(ring.cluster(item.cluster).size());
        uint32_t f = (sz > 0 ? sz - 1 : 0) / 3;
        uint32_t quorum = (sz + f) / 2 + 1;
        std::map<Bytes, uint32_t> counts;
        auto it = echoes.find(member);
        if (it != echoes.end()) {
          auto jt = it->second.find(static_cast<uint32_t>(i));
          if (jt != it->second.end())
            for (const auto& [from, v] : jt->second) ++counts[v];
        }
        for (const auto& [v, c] : counts)
          if (c >= quorum) {
            out = out ? std::optional<Bytes>{} : std::optional<Bytes>{v};
            if (!out) break;
          }
      } else {
        auto it = state.find(member);
        if (it != state.end()) {
          auto jt = it->second.find(static_cast<uint32_t>(i));
          if (jt != it->second.end() && jt->second.extracted.size() == 1)
            out = jt->second.extracted.front();
        }
      }
      outcomes[i].delivered[member] = std::move(out);
    }
  }
  return outcomes;
}

BroadcastOutcome secure_broadcast(World& world, const ClusterRing& ring, uint32_t cluster,
                                  NodeId sender, Bytes value, uint32_t seq,
                                  BroadcastStrategy strategy) {
  BroadcastItem item{cluster, sender, std::move(value), 0};
  auto outs = secure_broadcast_batch(world, ring, std::span(&item, 1), seq, strategy);
  return std::move(outs.front());
}

}  // namespace secagg::comm
