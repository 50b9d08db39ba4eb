#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "secagg/common.hpp"
#include "secagg/rng.hpp"

namespace secagg::overlay {

using NodeId = uint64_t;

/// 64-bit fixed-point fraction: position / 2^64 in [0, 1).
using Position = uint64_t;

struct BootstrapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SystemParams {
  uint32_t n = 0;
  double epsilon = 0.1;
  double tau_frac = 0.0;
  uint32_t k_cluster = 2;
  double c_seg = 1.0;
  uint64_t seed = 0;

  /// Model-bound checks (tau < 1/2 - eps, k > 1/eps, room for two clusters).
  /// Counterexample experiments construct knowingly-invalid params with
  /// strict=false.
  void validate(bool strict = true) const;
};

/// max(4, ceil(k * log_base n)), rounded up to even. Base 2 by default; the
/// base is a config knob because measurements in the literature leave it
/// unstated.
uint32_t cluster_size(uint32_t n, uint32_t k_cluster, double log_base = 2.0);

struct Member {
  NodeId id;
  Position pos;
  bool operator==(const Member&) const = default;
};

struct Cluster {
  std::vector<Member> members;  // sorted by position
};

struct ChurnMove {
  NodeId id;
  Position to;
};

struct ChurnReport {
  std::vector<ChurnMove> moved;  // joiner/replacers first, then scattered nodes
};

/// Partition of the live nodes into g ring-ordered clusters over [0,1).
/// g is a power of two fixed at bootstrap; churn moves nodes between the
/// fixed segments. Mutation is single-writer (the simulator event loop).
class Overlay {
 public:
  uint32_t g = 1;
  uint32_t log2_g = 0;
  uint32_t k_churn = 2;
  uint64_t epoch = 0;
  uint32_t bootstrap_redraws = 0;
  std::vector<Cluster> clusters;

  size_t node_count() const { return index_.size(); }
  uint32_t cluster_of(Position p) const {
    return log2_g == 0 ? 0 : static_cast<uint32_t>(p >> (64 - log2_g));
  }
  bool contains(NodeId id) const { return index_.count(id) != 0; }
  std::optional<Position> position_of(NodeId id) const;
  const std::map<NodeId, Position>& nodes() const { return index_; }
  bool position_taken(Position p) const { return by_pos_.count(p) != 0; }

  void insert(NodeId id, Position p);
  void erase(NodeId id);

  /// Nodes with position in [lo, hi), hi = 0 meaning the top of the range.
  std::vector<NodeId> nodes_in_range(Position lo, uint64_t hi) const;

 private:
  std::map<NodeId, Position> index_;
  std::map<Position, NodeId> by_pos_;
};

/// Static hash-order partition: nodes sorted by a public hash of their
/// identity mapped into [1, n^3], cut into consecutive blocks of s. The last
/// cluster absorbs the remainder.
struct Layout {
  uint32_t cluster_size_target = 0;
  std::vector<std::vector<NodeId>> clusters;
  std::vector<std::pair<NodeId, uint64_t>> order;  // (id, hash), sorted
};

uint64_t default_node_hash(NodeId id, uint64_t n);

Layout hash_order_partition(const std::vector<NodeId>& nodes, uint32_t s,
                            const std::function<uint64_t(NodeId)>& hash);

Overlay bootstrap_initial(const std::vector<NodeId>& honest_nodes,
                          const SystemParams& params);

/// Cuckoo join: the new node lands on an rng-chosen position and every
/// current member of the target cluster inside the surrounding k/n-aligned
/// segment is evicted to a fresh position. Evictions do not cascade.
ChurnReport cuckoo_join(Overlay& o, NodeId node, Rng& rng);

/// Core of the join rule with the landing position already agreed on;
/// `evict_rng` supplies the fresh positions of the evicted nodes.
ChurnReport cuckoo_join_at(Overlay& o, NodeId node, Position pos, Rng& evict_rng);

/// A free position drawn from rng (collision re-draw).
Position draw_position(const Overlay& o, Rng& rng);

/// Leave rule: remove the node, then nodes of one random k/n segment replace
/// the nodes of a random k/n segment inside the departed cluster, and the
/// displaced nodes scatter to fresh positions.
ChurnReport leave(Overlay& o, NodeId node, Rng& rng);

/// The replace-and-scatter churn of the leave rule, run against `cluster`
/// after the departed node is already gone.
ChurnReport leave_churn(Overlay& o, uint32_t cluster, Rng& rng);

std::vector<uint32_t> compute_fingers(uint32_t g, uint32_t i);

std::vector<uint32_t> fingers(const Overlay& o, uint32_t i);

struct MajorityRow {
  uint32_t cluster = 0;
  uint32_t honest = 0;
  uint32_t size = 0;
  bool majority = false;
};

struct MajorityReport {
  std::vector<MajorityRow> rows;
  bool all_majority = true;
};

/// Simulator-only oracle: protocol code never sees honesty flags.
MajorityReport check_honest_majority(const std::vector<std::vector<NodeId>>& clusters,
                                     const std::set<NodeId>& adversaries);

/// Ring-ordered membership view shared by the static and dynamic layouts;
/// what the aggregation engine and the communication layer run on.
class ClusterRing {
 public:
  static ClusterRing from_overlay(const Overlay& o);
  static ClusterRing from_layout(const Layout& l);

  uint32_t g() const { return static_cast<uint32_t>(clusters_.size()); }
  const std::vector<std::vector<NodeId>>& clusters() const { return clusters_; }
  const std::vector<NodeId>& cluster(uint32_t i) const { return clusters_.at(i); }
  std::optional<uint32_t> cluster_of(NodeId id) const;
  std::vector<uint32_t> fingers(uint32_t i) const { return compute_fingers(g(), i); }
  bool adjacent(uint32_t a, uint32_t b) const;
  std::vector<NodeId> all_nodes() const;

 private:
  std::vector<std::vector<NodeId>> clusters_;  // members sorted by id
  std::map<NodeId, uint32_t> node_cluster_;
};

std::string snapshot(const Overlay& o);
std::string snapshot(const Layout& l);

}  // namespace secagg::overlay
