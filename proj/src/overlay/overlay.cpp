#include "secagg/overlay/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "secagg/sha256.hpp"

namespace secagg::overlay {

namespace {

using u128 = unsigned __int128;

uint32_t segment_count(size_t n, uint32_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (n == 0) return 1;
  return static_cast<uint32_t>(std::max<size_t>(1, (n + k - 1) / k));
}

uint32_t segment_of(Position p, uint32_t segments) {
  return static_cast<uint32_t>((u128(p) * segments) >> 64);
}

// Exact preimage of segment_of: positions p with (p * segments) >> 64 == seg
// form [ceil(seg * 2^64 / segments), ceil((seg+1) * 2^64 / segments)).
uint64_t segment_lo(uint32_t seg, uint32_t segments) {
  return static_cast<uint64_t>(((u128(1) << 64) * seg + segments - 1) / segments);
}

// Half-open upper bound; 2^64 is represented by wrap-around 0 for the last
// segment, handled by callers via the u128 form.
u128 segment_hi128(uint32_t seg, uint32_t segments) {
  return ((u128(1) << 64) * (seg + 1) + segments - 1) / segments;
}

Position draw_unique(Overlay& o, Rng& rng) {
  while (true) {
    Position p = rng.next();
    if (!o.position_taken(p)) return p;
  }
}

Position draw_unique_in(Overlay& o, Rng& rng, uint64_t lo, u128 hi) {
  u128 span = hi - lo;
  while (true) {
    Position p = lo + static_cast<uint64_t>(rng.below(static_cast<uint64_t>(span)));
    if (!o.position_taken(p)) return p;
  }
}

}  // namespace

void SystemParams::validate(bool strict) const {
  if (n < 4) throw std::invalid_argument("need at least 4 nodes");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("epsilon in (0, 1/2)");
  if (!strict) return;
  if (!(tau_frac < 0.5 - epsilon))
    throw std::invalid_argument("tau_frac must be below 1/2 - epsilon");
  if (!(k_cluster > 1.0 / epsilon))
    throw std::invalid_argument("k_cluster must exceed 1/epsilon");
  if (n < 2 * cluster_size(n, k_cluster))
    throw std::invalid_argument("too few nodes for two clusters");
}

uint32_t cluster_size(uint32_t n, uint32_t k_cluster, double log_base) {
  if (n < 4) throw std::invalid_argument("cluster_size needs n >= 4");
  if (!(log_base > 1.0)) throw std::invalid_argument("log base must exceed 1");
  double raw = k_cluster * std::log2(static_cast<double>(n)) / std::log2(log_base);
  uint32_t s = std::max<uint32_t>(4, static_cast<uint32_t>(std::ceil(raw)));
  if (s % 2 != 0) ++s;
  return s;
}

std::optional<Position> Overlay::position_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Overlay::insert(NodeId id, Position p) {
  if (index_.count(id)) throw std::invalid_argument("node already present");
  if (by_pos_.count(p)) throw std::invalid_argument("position collision");
  index_.emplace(id, p);
  by_pos_.emplace(p, id);
  auto& members = clusters.at(cluster_of(p)).members;
  members.insert(std::upper_bound(members.begin(), members.end(), p,
                                  [](Position v, const Member& m) { return v < m.pos; }),
                 Member{id, p});
}

void Overlay::erase(NodeId id) {
  auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("unknown node");
  Position p = it->second;
  auto& members = clusters.at(cluster_of(p)).members;
  members.erase(std::find_if(members.begin(), members.end(),
                             [&](const Member& m) { return m.id == id; }));
  by_pos_.erase(p);
  index_.erase(it);
}

std::vector<NodeId> Overlay::nodes_in_range(Position lo, uint64_t hi) const {
  std::vector<NodeId> out;
  auto it = by_pos_.lower_bound(lo);
  auto end = hi == 0 ? by_pos_.end() : by_pos_.lower_bound(hi);
  for (; it != end; ++it) out.push_back(it->second);
  std::sort(out.begin(), out.end());
  return out;
}

uint64_t default_node_hash(NodeId id, uint64_t n) {
  if (n > (uint64_t{1} << 21)) throw std::invalid_argument("n too large for n^3 range");
  Sha256 h;
  h.update("secagg.nodehash");
  h.update_u64(id);
  uint64_t raw = digest_to_u64(h.finish());
  u128 cube = u128(n) * n * n;
  return static_cast<uint64_t>(raw % cube) + 1;
}

Layout hash_order_partition(const std::vector<NodeId>& nodes, uint32_t s,
                            const std::function<uint64_t(NodeId)>& hash) {
  if (s == 0) throw std::invalid_argument("cluster size must be positive");
  if (nodes.size() < 2 * static_cast<size_t>(s))
    throw std::invalid_argument("too few nodes: need at least two clusters");

  Layout l;
  l.cluster_size_target = s;
  l.order.reserve(nodes.size());
  for (NodeId id : nodes) l.order.emplace_back(id, hash(id));
  std::sort(l.order.begin(), l.order.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });

  size_t g = nodes.size() / s;
  l.clusters.resize(g);
  for (size_t i = 0; i < l.order.size(); ++i) {
    size_t c = std::min(i / s, g - 1);  // remainder joins the last cluster
    l.clusters[c].push_back(l.order[i].first);
  }
  return l;
}

Overlay bootstrap_initial(const std::vector<NodeId>& honest_nodes,
                          const SystemParams& params) {
  uint32_t n = static_cast<uint32_t>(honest_nodes.size());
  uint32_t s = cluster_size(n, params.k_cluster);
  if (n < 2 * s) throw BootstrapError("too few nodes for two clusters");
  uint32_t log2_g =
      static_cast<uint32_t>(std::ceil(std::log2(static_cast<double>(n) / s)));
  uint32_t g = uint32_t{1} << log2_g;

  for (uint32_t attempt = 0; attempt < 100; ++attempt) {
    Overlay o;
    o.g = g;
    o.log2_g = log2_g;
    o.k_churn = params.k_cluster;
    o.bootstrap_redraws = attempt;
    o.clusters.resize(g);
    Rng rng(derive_seed(params.seed, "bootstrap", attempt));
    for (NodeId id : honest_nodes) {
      Position p;
      do {
        p = rng.next();
      } while (o.position_taken(p));
      o.insert(id, p);
    }
    bool ok = true;
    for (const Cluster& c : o.clusters)
      if (c.members.empty()) ok = false;
    if (ok) return o;
  }
  throw BootstrapError("could not fill every cluster in 100 redraws");
}

Position draw_position(const Overlay& o, Rng& rng) {
  while (true) {
    Position p = rng.next();
    if (!o.position_taken(p)) return p;
  }
}

ChurnReport cuckoo_join_at(Overlay& o, NodeId node, Position pos, Rng& evict_rng) {
  if (o.contains(node)) throw std::invalid_argument("node already joined");
  if (o.position_taken(pos)) throw std::invalid_argument("position collision");
  ChurnReport report;

  size_t n_after = o.node_count() + 1;
  uint32_t segments = segment_count(n_after, o.k_churn);
  uint32_t seg = segment_of(pos, segments);
  uint32_t target = o.cluster_of(pos);

  // Snapshot eviction set before the overlay changes.
  std::vector<NodeId> evicted;
  for (const Member& m : o.clusters[target].members)
    if (segment_of(m.pos, segments) == seg) evicted.push_back(m.id);
  std::sort(evicted.begin(), evicted.end());

  o.insert(node, pos);
  report.moved.push_back({node, pos});
  for (NodeId id : evicted) {
    o.erase(id);
    Position p = draw_unique(o, evict_rng);
    o.insert(id, p);
    report.moved.push_back({id, p});
  }
  return report;
}

ChurnReport cuckoo_join(Overlay& o, NodeId node, Rng& rng) {
  Position pos = draw_position(o, rng);
  return cuckoo_join_at(o, node, pos, rng);
}

ChurnReport leave(Overlay& o, NodeId node, Rng& rng) {
  auto posopt = o.position_of(node);
  if (!posopt) throw NotFoundError("unknown node");
  uint32_t cluster = o.cluster_of(*posopt);
  o.erase(node);
  return leave_churn(o, cluster, rng);
}

ChurnReport leave_churn(Overlay& o, uint32_t cluster, Rng& rng) {
  ChurnReport report;

  size_t n = o.node_count();
  if (n == 0) return report;
  uint32_t segments = segment_count(n, o.k_churn);

  uint32_t s1 = static_cast<uint32_t>(rng.below(segments));

  // Candidate replacement segments fully inside the departed cluster's range.
  u128 c_lo = (u128(1) << 64) * cluster / o.g;
  u128 c_hi = (u128(1) << 64) * (cluster + 1) / o.g;
  std::vector<uint32_t> candidates;
  for (uint32_t j = segment_of(static_cast<Position>(c_lo), segments);
       j < segments && u128(segment_lo(j, segments)) < c_hi; ++j) {
    if (u128(segment_lo(j, segments)) >= c_lo && segment_hi128(j, segments) <= c_hi)
      candidates.push_back(j);
  }
  if (candidates.empty()) {
    // Degenerate geometry (segments wider than the cluster): fall back to the
    // segments overlapping the cluster.
    for (uint32_t j = 0; j < segments; ++j)
      if (segment_hi128(j, segments) > c_lo && u128(segment_lo(j, segments)) < c_hi)
        candidates.push_back(j);
  }
  uint32_t s2 = candidates[rng.below(candidates.size())];

  auto segment_nodes = [&](uint32_t seg) {
    return o.nodes_in_range(segment_lo(seg, segments),
                            static_cast<uint64_t>(segment_hi128(seg, segments)));
  };
  std::vector<NodeId> movers = segment_nodes(s1);
  std::vector<NodeId> displaced;
  if (s2 != s1) displaced = segment_nodes(s2);

  // The displaced scatter anywhere; the movers take over the s2 segment.
  for (NodeId id : displaced) {
    o.erase(id);
    Position p = draw_unique(o, rng);
    o.insert(id, p);
    report.moved.push_back({id, p});
  }
  uint64_t lo = segment_lo(s2, segments);
  u128 hi = segment_hi128(s2, segments);
  for (NodeId id : movers) {
    o.erase(id);
    Position p = draw_unique_in(o, rng, lo, hi);
    o.insert(id, p);
    report.moved.push_back({id, p});
  }
  return report;
}

std::vector<uint32_t> compute_fingers(uint32_t g, uint32_t i) {
  if (g == 0 || i >= g) throw std::invalid_argument("bad cluster index");
  std::set<uint32_t> out;
  out.insert((i + 1) % g);
  out.insert((i + g - 1) % g);
  for (uint32_t jump = 2; jump < g; jump *= 2) out.insert((i + jump) % g);
  out.erase(i);  // self-finger excluded
  return {out.begin(), out.end()};
}

std::vector<uint32_t> fingers(const Overlay& o, uint32_t i) {
  return compute_fingers(o.g, i);
}

MajorityReport check_honest_majority(const std::vector<std::vector<NodeId>>& clusters,
                                     const std::set<NodeId>& adversaries) {
  MajorityReport report;
  for (uint32_t i = 0; i < clusters.size(); ++i) {
    MajorityRow row;
    row.cluster = i;
    row.size = static_cast<uint32_t>(clusters[i].size());
    for (NodeId id : clusters[i])
      if (!adversaries.count(id)) ++row.honest;
    row.majority = 2 * row.honest > row.size;
    report.all_majority = report.all_majority && row.majority;
    report.rows.push_back(row);
  }
  return report;
}

ClusterRing ClusterRing::from_overlay(const Overlay& o) {
  ClusterRing r;
  r.clusters_.resize(o.clusters.size());
  for (uint32_t i = 0; i < o.clusters.size(); ++i) {
    for (const Member& m : o.clusters[i].members) r.clusters_[i].push_back(m.id);
    std::sort(r.clusters_[i].begin(), r.clusters_[i].end());
    for (NodeId id : r.clusters_[i]) r.node_cluster_.emplace(id, i);
  }
  return r;
}

ClusterRing ClusterRing::from_layout(const Layout& l) {
  ClusterRing r;
  r.clusters_ = l.clusters;
  for (uint32_t i = 0; i < r.clusters_.size(); ++i) {
    std::sort(r.clusters_[i].begin(), r.clusters_[i].end());
    for (NodeId id : r.clusters_[i]) r.node_cluster_.emplace(id, i);
  }
  return r;
}

std::optional<uint32_t> ClusterRing::cluster_of(NodeId id) const {
  auto it = node_cluster_.find(id);
  if (it == node_cluster_.end()) return std::nullopt;
  return it->second;
}

bool ClusterRing::adjacent(uint32_t a, uint32_t b) const {
  if (a == b || a >= g() || b >= g()) return false;
  auto fa = fingers(a);
  if (std::find(fa.begin(), fa.end(), b) != fa.end()) return true;
  auto fb = fingers(b);
  return std::find(fb.begin(), fb.end(), a) != fb.end();
}

std::vector<NodeId> ClusterRing::all_nodes() const {
  std::vector<NodeId> out;
  for (const auto& [id, c] : node_cluster_) out.push_back(id);
  return out;
}

std::string snapshot(const Overlay& o) {
  std::ostringstream out;
  for (uint32_t i = 0; i < o.clusters.size(); ++i) {
    out << "cluster " << i << ":";
    for (const Member& m : o.clusters[i].members) {
      char buf[20];
      std::snprintf(buf, sizeof(buf), "%016llx",
                    static_cast<unsigned long long>(m.pos));
      out << ' ' << m.id << '@' << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string snapshot(const Layout& l) {
  std::map<NodeId, uint64_t> hash;
  for (const auto& [id, h] : l.order) hash[id] = h;
  std::ostringstream out;
  for (uint32_t i = 0; i < l.clusters.size(); ++i) {
    out << "cluster " << i << ":";
    for (NodeId id : l.clusters[i]) {
      char buf[20];
      std::snprintf(buf, sizeof(buf), "%016llx",
                    static_cast<unsigned long long>(hash[id]));
      out << ' ' << id << '@' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace secagg::overlay
