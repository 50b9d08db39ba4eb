#pragma once

#include "secagg/engine/config.hpp"
#include "secagg/engine/engine.hpp"

namespace secagg::exp {

using engine::RunConfig;

/// One CSV row of the scaling sweep; the column set is fixed.
struct SweepRow {
  uint32_t n = 0;
  double tau = 0.0;
  uint32_t k_cluster = 0;
  std::string backend;
  uint64_t seed = 0;
  uint64_t total_msgs = 0;
  uint64_t total_bytes = 0;
  uint64_t max_node_bytes = 0;
  double mean_node_bytes = 0.0;
  uint64_t phase_setup_bytes = 0;
  uint64_t phase_local_bytes = 0;
  uint64_t phase_ring_bytes = 0;
  uint64_t phase_decrypt_bytes = 0;
  double baseline_bytes = 0.0;
  bool result_ok = false;
  std::string error;  // row-level error marker, empty when the run executed
};

std::string csv_header();
std::string to_csv(const SweepRow& row);

struct RunArtifacts {
  engine::AggregationResult result;
  SweepRow row;
  std::string trace;
  std::string overlay_dump;
  bool honest_majority_all = false;
  uint64_t oracle_total = 0;  // mock backend only
  bool oracle_checked = false;
  bool oracle_match = false;
  overlay::MajorityReport majority;
};

/// Builds the layout and adversary from the config, runs one aggregation
/// epoch, and fills the CSV row plus the ground-truth cross-check.
RunArtifacts run_once(const RunConfig& config, bool want_trace = false,
                      bool want_overlay = false, bool track_recipients = false);

std::vector<SweepRow> sweep_scaling(const std::vector<uint32_t>& ns,
                                    const RunConfig& base);

/// Analytic cost of the non-layout protocol: every node secure-broadcasts its
/// encrypted input to all others, then its decryption share; a broadcast to m
/// receivers is billed 2m^2 + m envelopes.
struct BaselineCost {
  double messages = 0;
  double bytes = 0;
};
BaselineCost baseline_cost(uint32_t n, const crypto::SecurityParams& sec,
                           size_t domain_size);

struct PartitionMcResult {
  uint32_t n = 0, s = 0, trials = 0;
  uint32_t malicious = 0;
  double frequency = 0.0;          // all clusters honest-majority
  double exact_union_lower = 0.0;  // 1 - union bound on any-cluster failure
  double std_error = 0.0;
  std::vector<double> cluster_fail_tails;  // one per cluster
};

/// Monte Carlo over uniform random partitions into blocks of s (last block
/// absorbs the remainder) against the exact hypergeometric tail union bound.
PartitionMcResult montecarlo_partition(uint32_t n, double tau_frac, uint32_t s,
                                       uint32_t trials, uint64_t seed);

struct LowerBoundConfig {
  uint32_t n = 10000;
  double epsilon = 0.3;  // malicious fraction of the interception theorem
  uint32_t omega_plus = 2;
  uint32_t omega_minus = 16;
  double c_frac = 1.0;
  uint32_t trials = 500;
  uint64_t seed = 1;

  void validate() const;
};

struct LowerBoundResult {
  double surrounded_frequency = 0.0;      // among the greedy disjoint senders
  double surrounded_any_frequency = 0.0;  // among all senders
  double mean_disjoint_sets = 0.0;
  double closed_form = 0.0;  // mean of 1 - (1 - eps^w+)^K over trials
  double std_error = 0.0;
  uint32_t trials = 0;
};

/// Per trial: low-degree senders pick omega_plus random recipients (reception
/// capped at omega_minus), the proof's greedy construction extracts senders
/// with pairwise disjoint recipient sets, and a uniform eps-fraction
/// adversary is drawn; reports how often some extracted sender had all of its
/// recipients malicious.
LowerBoundResult lowerbound_demo(const LowerBoundConfig& config);

}  // namespace secagg::exp
