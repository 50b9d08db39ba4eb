#include "secagg/exp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace secagg::exp {

using engine::EpochConfig;
using net::Phase;
using overlay::ClusterRing;
using overlay::NodeId;

std::string csv_header() {
  return "n,tau,k_cluster,backend,seed,total_msgs,total_bytes,max_node_bytes,"
         "mean_node_bytes,phase_setup_bytes,phase_local_bytes,phase_ring_bytes,"
         "phase_decrypt_bytes,baseline_bytes,result_ok";
}

std::string to_csv(const SweepRow& row) {
  std::ostringstream out;
  if (!row.error.empty()) {
    out << row.n << ",,,,,,,,,,,,,,ERROR:" << row.error;
    return out.str();
  }
  char mean[40], base[40];
  std::snprintf(mean, sizeof(mean), "%.1f", row.mean_node_bytes);
  std::snprintf(base, sizeof(base), "%.0f", row.baseline_bytes);
  out << row.n << ',' << row.tau << ',' << row.k_cluster << ',' << row.backend << ','
      << row.seed << ',' << row.total_msgs << ',' << row.total_bytes << ','
      << row.max_node_bytes << ',' << mean << ',' << row.phase_setup_bytes << ','
      << row.phase_local_bytes << ',' << row.phase_ring_bytes << ','
      << row.phase_decrypt_bytes << ',' << base << ',' << (row.result_ok ? 1 : 0);
  return out.str();
}

BaselineCost baseline_cost(uint32_t n, const crypto::SecurityParams& sec,
                           size_t domain_size) {
  double m = n - 1;
  double per_broadcast = 2.0 * m * m + m;
  double input_payload = 4 + crypto::nominal_ciphertext_bytes(sec) + 4 +
                         crypto::nominal_membership_proof_bytes(sec, domain_size);
  double share_payload = 4 + 4 + crypto::nominal_decryption_share_bytes(sec) + 4 +
                         crypto::nominal_share_proof_bytes(sec);
  double env_overhead = net::kEnvelopeHeaderBytes + net::kSignatureBytes;
  BaselineCost cost;
  cost.messages = 2.0 * n * per_broadcast;
  cost.bytes = n * per_broadcast * (input_payload + env_overhead) +
               n * per_broadcast * (share_payload + env_overhead);
  return cost;
}

RunArtifacts run_once(const RunConfig& config, bool want_trace, bool want_overlay,
                      bool track_recipients) {
  RunArtifacts art;

  // Node identities are issued by the simulated CA as consecutive integers;
  // the hash-order layout re-randomizes their arrangement.
  std::vector<NodeId> ids;
  for (uint32_t i = 1; i <= config.n; ++i) ids.push_back(i);

  uint32_t s = overlay::cluster_size(config.n, config.k_cluster, config.log_base);
  ClusterRing ring;
  std::optional<overlay::Overlay> dyn;
  if (config.layout == "hash") {
    auto layout = overlay::hash_order_partition(
        ids, s, [&](NodeId id) { return overlay::default_node_hash(id, config.n); });
    if (want_overlay) art.overlay_dump = overlay::snapshot(layout);
    ring = ClusterRing::from_layout(layout);
  } else if (config.layout == "bootstrap") {
    overlay::SystemParams params;
    params.n = config.n;
    params.epsilon = config.epsilon;
    params.tau_frac = config.tau_frac;
    params.k_cluster = config.k_cluster;
    params.seed = config.seed;
    params.validate(/*strict=*/!config.unsafe_tau);
    dyn = overlay::bootstrap_initial(ids, params);
    if (want_overlay) art.overlay_dump = overlay::snapshot(*dyn);
    ring = ClusterRing::from_overlay(*dyn);
  } else {
    throw std::invalid_argument("layout must be hash or bootstrap");
  }

  auto adv = net::corrupt(config.corruption_enum(), ids, config.tau_frac,
                          derive_seed(config.seed, "corrupt"), config.behavior_pool(),
                          config.epsilon, config.unsafe_tau, &ring.clusters(),
                          &config.target_clusters);
  art.majority = overlay::check_honest_majority(ring.clusters(), adv.malicious);
  art.honest_majority_all = art.majority.all_majority;

  EpochConfig epoch;
  epoch.backend = config.backend_enum();
  epoch.sec = config.security_params();
  epoch.domain.values = config.domain;
  epoch.strategy = config.strategy_enum();
  epoch.seed = config.seed;

  std::map<NodeId, uint64_t> inputs;
  for (NodeId id : ids) {
    if (adv.is_malicious(id)) continue;
    uint64_t pick = derive_seed(config.seed, "vote", id) % config.domain.size();
    inputs[id] = config.domain[pick];
  }

  net::WorldOptions opts;
  opts.trace = want_trace;
  opts.track_recipients = track_recipients;
  net::World world(config.seed, ids, adv, opts);
  art.result = engine::run_aggregation(world, ring, epoch, inputs);
  art.trace = world.trace();

  if (epoch.backend == crypto::Backend::Mock) {
    unsigned __int128 sum = 0;
    for (const auto& cluster : art.result.accepted_per_cluster)
      for (const auto& [id, ct] : cluster) sum += crypto::oracle_open_mock(ct);
    art.oracle_total = static_cast<uint64_t>(sum % (uint64_t{1} << 63));
    art.oracle_checked = true;
    art.oracle_match = art.result.ok && art.result.total == art.oracle_total;
  }

  SweepRow& row = art.row;
  row.n = config.n;
  row.tau = config.tau_frac;
  row.k_cluster = config.k_cluster;
  row.backend = config.backend;
  row.seed = config.seed;
  const net::RunMetrics& m = art.result.metrics;
  row.total_msgs = m.sent_msgs;
  row.total_bytes = m.sent_bytes;
  row.max_node_bytes = m.max_node_bytes();
  row.mean_node_bytes = m.mean_node_bytes();
  row.phase_setup_bytes = m.phase_bytes(Phase::Setup);
  row.phase_local_bytes = m.phase_bytes(Phase::Submit) + m.phase_bytes(Phase::Local);
  row.phase_ring_bytes = m.phase_bytes(Phase::Ring);
  row.phase_decrypt_bytes = m.phase_bytes(Phase::Decrypt) + m.phase_bytes(Phase::Result);
  row.baseline_bytes = baseline_cost(config.n, epoch.sec, config.domain.size()).bytes;
  row.result_ok = art.result.ok;
  return art;
}

std::vector<SweepRow> sweep_scaling(const std::vector<uint32_t>& ns,
                                    const RunConfig& base) {
  std::vector<SweepRow> rows;
  for (uint32_t n : ns) {
    RunConfig c = base;
    c.n = n;
    try {
      rows.push_back(run_once(c).row);
    } catch (const std::exception& e) {
      SweepRow row;
      row.n = n;
      row.error = e.what();
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

double log_choose(double a, double b) {
  if (b < 0 || b > a) return -HUGE_VAL;
  return std::lgamma(a + 1) - std::lgamma(b + 1) - std::lgamma(a - b + 1);
}

/// P[X >= k] for X ~ Hypergeometric(N, K, draws).
double hypergeom_tail(uint32_t N, uint32_t K, uint32_t draws, uint32_t k) {
  double tail = 0.0;
  uint32_t hi = std::min(K, draws);
  for (uint32_t x = k; x <= hi; ++x) {
    double lp = log_choose(K, x) + log_choose(N - K, draws - x) - log_choose(N, draws);
    tail += std::exp(lp);
  }
  return std::min(1.0, tail);
}

}  // namespace

PartitionMcResult montecarlo_partition(uint32_t n, double tau_frac, uint32_t s,
                                       uint32_t trials, uint64_t seed) {
  if (s < 2 || n < 2 * s) throw std::invalid_argument("need at least two clusters");
  PartitionMcResult res;
  res.n = n;
  res.s = s;
  res.trials = trials;
  res.malicious = static_cast<uint32_t>(tau_frac * n);

  uint32_t g = n / s;
  std::vector<uint32_t> sizes(g, s);
  sizes.back() += n - g * s;

  double union_fail = 0.0;
  for (uint32_t sz : sizes) {
    uint32_t fail_min = sz / 2 + sz % 2;  // malicious count that kills the majority
    double tail = hypergeom_tail(n, res.malicious, sz, fail_min);
    res.cluster_fail_tails.push_back(tail);
    union_fail += tail;
  }
  res.exact_union_lower = std::max(0.0, 1.0 - union_fail);

  Rng rng(derive_seed(seed, "partition.mc"));
  std::vector<uint32_t> arr(n);
  for (uint32_t i = 0; i < n; ++i) arr[i] = i;
  uint32_t ok_count = 0;
  for (uint32_t t = 0; t < trials; ++t) {
    std::shuffle(arr.begin(), arr.end(), rng.engine());
    bool ok = true;
    size_t idx = 0;
    for (uint32_t sz : sizes) {
      uint32_t mal = 0;
      for (uint32_t j = 0; j < sz; ++j)
        if (arr[idx + j] < res.malicious) ++mal;
      idx += sz;
      if (!(2 * (sz - mal) > sz)) {
        ok = false;
        break;
      }
    }
    if (ok) ++ok_count;
  }
  res.frequency = static_cast<double>(ok_count) / trials;
  res.std_error = std::sqrt(std::max(1e-12, res.frequency * (1 - res.frequency) /
                                                  trials));
  return res;
}

void LowerBoundConfig::validate() const {
  if (omega_plus < 1) throw std::invalid_argument("omega_plus must be >= 1");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon in [0,1)");
  if (!(c_frac > 0.0 && c_frac <= 1.0)) throw std::invalid_argument("c_frac in (0,1]");
  if (n < 2 * omega_plus) throw std::invalid_argument("n too small");
}

LowerBoundResult lowerbound_demo(const LowerBoundConfig& config) {
  config.validate();
  LowerBoundResult res;
  res.trials = config.trials;

  uint32_t surrounded = 0, surrounded_any = 0;
  double k_sum = 0.0, closed_sum = 0.0;

  for (uint32_t t = 0; t < config.trials; ++t) {
    Rng rng(derive_seed(config.seed, "lowerbound", t));
    uint32_t senders = std::max<uint32_t>(1, static_cast<uint32_t>(config.c_frac * config.n));

    // Random recipient sets with the reception cap.
    std::vector<uint32_t> receptions(config.n, 0);
    std::vector<std::vector<uint32_t>> recipients(senders);
    for (uint32_t i = 0; i < senders; ++i) {
      auto& set = recipients[i];
      while (set.size() < config.omega_plus) {
        uint32_t r = static_cast<uint32_t>(rng.below(config.n));
        if (r == i) continue;
        if (std::find(set.begin(), set.end(), r) != set.end()) continue;
        if (receptions[r] >= config.omega_minus) continue;
        receptions[r] += 1;
        set.push_back(r);
      }
    }

    // Greedy extraction of senders with pairwise disjoint recipient sets.
    std::vector<char> used(config.n, 0);
    std::vector<uint32_t> extracted;
    for (uint32_t i = 0; i < senders; ++i) {
      bool clash = false;
      for (uint32_t r : recipients[i])
        if (used[r]) clash = true;
      if (clash) continue;
      for (uint32_t r : recipients[i]) used[r] = 1;
      extracted.push_back(i);
    }
    k_sum += static_cast<double>(extracted.size());
    closed_sum += 1.0 - std::pow(1.0 - std::pow(config.epsilon, config.omega_plus),
                                 static_cast<double>(extracted.size()));

    // Static adversary drawn uniformly.
    uint32_t mal_count = static_cast<uint32_t>(config.epsilon * config.n);
    std::vector<uint32_t> order(config.n);
    for (uint32_t i = 0; i < config.n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng.engine());
    std::vector<char> malicious(config.n, 0);
    for (uint32_t i = 0; i < mal_count; ++i) malicious[order[i]] = 1;

    auto all_malicious = [&](const std::vector<uint32_t>& set) {
      for (uint32_t r : set)
        if (!malicious[r]) return false;
      return !set.empty();
    };
    bool hit = false;
    for (uint32_t i : extracted)
      if (all_malicious(recipients[i])) {
        hit = true;
        break;
      }
    if (hit) ++surrounded;
    bool hit_any = hit;
    for (uint32_t i = 0; i < senders && !hit_any; ++i)
      if (all_malicious(recipients[i])) hit_any = true;
    if (hit_any) ++surrounded_any;
  }

  res.surrounded_frequency = static_cast<double>(surrounded) / config.trials;
  res.surrounded_any_frequency = static_cast<double>(surrounded_any) / config.trials;
  res.mean_disjoint_sets = k_sum / config.trials;
  res.closed_form = closed_sum / config.trials;
  res.std_error = std::sqrt(std::max(
      1e-12, res.surrounded_frequency * (1 - res.surrounded_frequency) / config.trials));
  return res;
}

}  // namespace secagg::exp
