#include "secagg/net/world.hpp"

#include <algorithm>
#include <sstream>

namespace secagg::net {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Idle: return "idle";
    case Phase::Bootstrap: return "bootstrap";
    case Phase::Maintain: return "maintain";
    case Phase::Setup: return "setup";
    case Phase::Submit: return "submit";
    case Phase::Local: return "local";
    case Phase::Ring: return "ring";
    case Phase::Decrypt: return "decrypt";
    case Phase::Result: return "result";
    case Phase::Experiment: return "experiment";
  }
  return "?";
}

const char* behavior_name(Behavior b) {
  switch (b) {
    case Behavior::Honest: return "honest";
    case Behavior::DropAll: return "drop_all";
    case Behavior::DropSelective: return "drop_selective";
    case Behavior::Equivocate: return "equivocate";
    case Behavior::GarbagePayload: return "garbage_payload";
    case Behavior::InvalidInput: return "invalid_input";
    case Behavior::BadShare: return "bad_share";
    case Behavior::Abstain: return "abstain";
    case Behavior::Replay: return "replay";
  }
  return "?";
}

Behavior behavior_from_name(const std::string& name) {
  for (uint8_t i = 0; i <= static_cast<uint8_t>(Behavior::Replay); ++i) {
    Behavior b = static_cast<Behavior>(i);
    if (name == behavior_name(b)) return b;
  }
  throw std::invalid_argument("unknown behavior: " + name);
}

std::vector<Behavior> full_misbehavior_suite() {
  return {Behavior::DropAll,     Behavior::DropSelective, Behavior::Equivocate,
          Behavior::GarbagePayload, Behavior::InvalidInput,  Behavior::BadShare,
          Behavior::Abstain,     Behavior::Replay};
}

AdversaryConfig corrupt(CorruptionStrategy strategy, const std::vector<NodeId>& nodes,
                        double tau_frac, uint64_t seed,
                        const std::vector<Behavior>& pool, double epsilon,
                        bool unsafe_override,
                        const std::vector<std::vector<NodeId>>* clusters,
                        const std::vector<uint32_t>* target_clusters) {
  if (tau_frac < 0.0 || tau_frac >= 1.0) throw std::invalid_argument("tau_frac out of range");
  if (!unsafe_override && !(tau_frac < 0.5 - epsilon))
    throw std::invalid_argument("tau_frac violates the 1/2 - epsilon bound");

  size_t budget = static_cast<size_t>(tau_frac * static_cast<double>(nodes.size()));
  AdversaryConfig cfg;
  Rng rng(derive_seed(seed, "corrupt"));

  std::vector<NodeId> order;
  switch (strategy) {
    case CorruptionStrategy::UniformRandom: {
      order = nodes;
      std::shuffle(order.begin(), order.end(), rng.engine());
      break;
    }
    case CorruptionStrategy::TargetedCluster: {
      if (!clusters || !target_clusters)
        throw std::invalid_argument("targeted corruption needs cluster info");
      std::set<NodeId> taken;
      for (uint32_t c : *target_clusters)
        for (NodeId id : clusters->at(c)) {
          order.push_back(id);
          taken.insert(id);
        }
      std::vector<NodeId> rest;
      for (NodeId id : nodes)
        if (!taken.count(id)) rest.push_back(id);
      std::shuffle(rest.begin(), rest.end(), rng.engine());
      order.insert(order.end(), rest.begin(), rest.end());
      break;
    }
    case CorruptionStrategy::JoinOrder: {
      order.assign(nodes.rbegin(), nodes.rend());
      break;
    }
  }
  order.resize(std::min(order.size(), budget));

  std::vector<Behavior> shuffled_pool = pool.empty() ? full_misbehavior_suite() : pool;
  std::shuffle(shuffled_pool.begin(), shuffled_pool.end(), rng.engine());
  size_t i = 0;
  for (NodeId id : order) {
    cfg.malicious.insert(id);
    cfg.behaviors[id] = shuffled_pool[i % shuffled_pool.size()];
    ++i;
  }
  return cfg;
}

uint64_t RunMetrics::max_node_bytes() const {
  uint64_t best = 0;
  for (const auto& [id, t] : per_node) best = std::max(best, t.sent_bytes + t.recv_bytes);
  return best;
}

double RunMetrics::mean_node_bytes() const {
  if (per_node.empty()) return 0.0;
  long double sum = 0;
  for (const auto& [id, t] : per_node) sum += t.sent_bytes + t.recv_bytes;
  return static_cast<double>(sum / per_node.size());
}

std::string RunMetrics::summary() const {
  std::ostringstream out;
  out << "sent=" << sent_msgs << " delivered=" << delivered_msgs
      << " dropped=" << dropped_msgs << " rejected=" << auth_rejections
      << " bytes=" << sent_bytes << '\n';
  for (const auto& [p, t] : per_phase)
    out << "phase " << phase_name(static_cast<Phase>(p)) << ": msgs=" << t.msgs
        << " bytes=" << t.bytes << '\n';
  for (const auto& [id, t] : per_node)
    out << "node " << id << ": s=" << t.sent_msgs << '/' << t.sent_bytes
        << " r=" << t.recv_msgs << '/' << t.recv_bytes << '\n';
  return out.str();
}

World::World(uint64_t seed, const std::vector<NodeId>& nodes, AdversaryConfig adv,
             WorldOptions opt)
    : seed_(seed),
      adv_(std::move(adv)),
      opt_(opt),
      adv_rng_(derive_seed(seed, "adversary")) {
  for (NodeId id : nodes) {
    live_.insert(id);
    metrics_.per_node.emplace(id, NodeTotals{});
  }
}

void World::add_node(NodeId id, Behavior b) {
  live_.insert(id);
  metrics_.per_node.emplace(id, NodeTotals{});
  if (b != Behavior::Honest) {
    adv_.malicious.insert(id);
    adv_.behaviors[id] = b;
  }
}

void World::remove_node(NodeId id) { live_.erase(id); }

bool World::alive(NodeId id) const { return live_.count(id) != 0; }

std::vector<NodeId> World::live_nodes() const { return {live_.begin(), live_.end()}; }

void World::begin_phase(Phase p, uint32_t epoch) {
  phase_ = p;
  epoch_ = epoch;
}

bool World::transport_coin(const char* label, const Envelope& env) {
  Sha256 h;
  h.update(label);
  h.update_u64(seed_).update_u64(env.sender).update_u64(env.receiver);
  h.update_u64(round_).update_u32(env.tag.seq);
  return (digest_to_u64(h.finish()) & 1) != 0;
}

void World::queue(Envelope env) { pending_.push_back(std::move(env)); }

void World::send(Envelope env) {
  if (!alive(env.sender)) throw std::logic_error("send from a dead node");

  auto account = [&](const Envelope& e) {
    auto& t = metrics_.per_node[e.sender];
    t.sent_msgs += 1;
    t.sent_bytes += e.wire_bytes();
    metrics_.sent_msgs += 1;
    metrics_.sent_bytes += e.wire_bytes();
    auto& pt = metrics_.per_phase[static_cast<uint32_t>(phase_)];
    pt.msgs += 1;
    pt.bytes += e.wire_bytes();
    op_msgs_ += 1;
    op_bytes_ += e.wire_bytes();
    if (opt_.track_recipients) recipients_[e.sender].insert(e.receiver);
  };
  account(env);

  if (is_malicious(env.sender)) {
    switch (behavior(env.sender)) {
      case Behavior::DropAll:
        metrics_.dropped_msgs += 1;
        return;
      case Behavior::DropSelective:
        if (transport_coin("dropsel", env)) {
          metrics_.dropped_msgs += 1;
          return;
        }
        break;
      case Behavior::GarbagePayload: {
        Rng g(derive_seed(seed_, "garbage", env.sender,
                          env.receiver ^ (round_ << 20) ^ env.tag.seq));
        Bytes junk;
        g.fill(junk, env.payload.size());
        env.payload = std::move(junk);
        break;
      }
      case Behavior::Replay: {
        auto& buf = replay_buffer_[env.sender];
        if (!buf.empty() && transport_coin("replay", env)) {
          Envelope dup = buf[static_cast<size_t>(adv_rng_.below(buf.size()))];
          account(dup);  // the duplicate is traffic too
          queue(std::move(dup));
        }
        if (buf.size() < 64) buf.push_back(env);
        break;
      }
      default:
        break;
    }
  }
  queue(std::move(env));
}

std::vector<Envelope> World::step_round() {
  ++round_;
  std::vector<Envelope> batch;
  batch.swap(pending_);
  std::stable_sort(batch.begin(), batch.end(), [](const Envelope& a, const Envelope& b) {
    if (a.receiver != b.receiver) return a.receiver < b.receiver;
    if (a.sender != b.sender) return a.sender < b.sender;
    return a.tag.seq < b.tag.seq;
  });

  std::vector<Envelope> delivered;
  delivered.reserve(batch.size());
  for (Envelope& env : batch) {
    if (!alive(env.receiver)) {
      metrics_.dropped_msgs += 1;
      continue;
    }
    auto& t = metrics_.per_node[env.receiver];
    t.recv_msgs += 1;
    t.recv_bytes += env.wire_bytes();
    metrics_.delivered_msgs += 1;
    if (opt_.trace) {
      trace_ += 'r';
      trace_ += std::to_string(round_);
      trace_ += ' ';
      trace_ += std::to_string(env.sender);
      trace_ += "->";
      trace_ += std::to_string(env.receiver);
      trace_ += " phase=";
      trace_ += phase_name(static_cast<Phase>(env.tag.phase));
      trace_ += " bytes=";
      trace_ += std::to_string(env.wire_bytes());
      trace_ += '\n';
    }
    delivered.push_back(std::move(env));
  }
  return delivered;
}

void World::run_idle_rounds(uint32_t k) {
  for (uint32_t i = 0; i < k; ++i) {
    if (!pending_.empty()) throw std::logic_error("idle round with pending envelopes");
    ++round_;
  }
}

void World::sign(NodeId signer, std::span<const uint8_t> statement) {
  signatures_[signer].insert(digest_to_u64(sha256(statement)));
}

bool World::verify_signature(NodeId signer, std::span<const uint8_t> statement) const {
  auto it = signatures_.find(signer);
  return it != signatures_.end() && it->second.count(digest_to_u64(sha256(statement)));
}

Rng& World::node_rng(NodeId id) {
  auto it = node_rngs_.find(id);
  if (it == node_rngs_.end())
    it = node_rngs_.emplace(id, std::make_unique<Rng>(derive_seed(seed_, "node", id))).first;
  return *it->second;
}

void World::op_begin() {
  op_msgs_ = 0;
  op_bytes_ = 0;
}

OpCost World::op_end(const std::string& kind) {
  OpCost cost{kind, op_msgs_, op_bytes_};
  metrics_.ops.push_back(cost);
  return cost;
}

}  // namespace secagg::net
