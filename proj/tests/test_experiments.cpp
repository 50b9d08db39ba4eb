#include <cmath>

#include "doctest.h"
#include "secagg/bigint.hpp"
#include "secagg/exp/experiments.hpp"

using namespace secagg;
using namespace secagg::exp;

namespace {

// Exact rational hypergeometric tail P[X >= k], independent of the lgamma
// route used by the experiment module.
double exact_tail(uint32_t N, uint32_t K, uint32_t draws, uint32_t k) {
  mpq_class tail = 0;
  mpz_class denom;
  mpz_bin_uiui(denom.get_mpz_t(), N, draws);
  for (uint32_t x = k; x <= std::min(K, draws); ++x) {
    mpz_class a, b;
    mpz_bin_uiui(a.get_mpz_t(), K, x);
    mpz_bin_uiui(b.get_mpz_t(), N - K, draws - x);
    tail += mpq_class(a * b) / mpq_class(denom);
  }
  return tail.get_d();
}

}  // namespace

TEST_CASE("csv header is the pinned column set") {
  CHECK(csv_header() ==
        "n,tau,k_cluster,backend,seed,total_msgs,total_bytes,max_node_bytes,"
        "mean_node_bytes,phase_setup_bytes,phase_local_bytes,phase_ring_bytes,"
        "phase_decrypt_bytes,baseline_bytes,result_ok");
  SweepRow row;
  row.n = 64;
  row.backend = "mock";
  std::string line = to_csv(row);
  CHECK(std::count(line.begin(), line.end(), ',') == 14);
}

TEST_CASE("baseline model is strictly increasing and superquadratic") {
  crypto::SecurityParams sec;
  sec.modulus_bits = 1024;
  double prev = 0;
  for (uint32_t n : {50u, 100u, 200u, 400u, 800u}) {
    double bytes = baseline_cost(n, sec, 2).bytes;
    CHECK(bytes > prev);
    if (prev > 0) CHECK(bytes / prev > 4.0);  // doubling n more than quadruples cost
    prev = bytes;
  }
}

TEST_CASE("baseline at n=200 with a 1024-bit modulus reaches the tens-of-GB range") {
  crypto::SecurityParams sec;
  sec.modulus_bits = 1024;
  double gb = baseline_cost(200, sec, 2).bytes / 1e9;
  CHECK(gb > 3.0);
  CHECK(gb < 300.0);
}

TEST_CASE("run config json round-trip") {
  RunConfig c;
  c.n = 128;
  c.tau_frac = 0.1;
  c.behaviors = {"drop_all", "equivocate"};
  c.layout = "bootstrap";
  RunConfig back = RunConfig::from_json(c.to_json());
  CHECK(back.n == 128);
  CHECK(back.tau_frac == 0.1);
  CHECK(back.behaviors == c.behaviors);
  CHECK(back.layout == "bootstrap");
  CHECK(back.backend_enum() == crypto::Backend::Mock);

  RunConfig defaults = RunConfig::from_json("{}");
  CHECK(defaults.n == 64);
  CHECK_THROWS(RunConfig::from_json("{\"backend\": 3}"));
}

TEST_CASE("run_once matches the plaintext oracle and reports majority state") {
  RunConfig c;
  c.n = 64;
  c.tau_frac = 0.25;
  c.seed = 9;
  auto art = run_once(c);
  CHECK(art.oracle_checked);
  if (art.honest_majority_all) {
    CHECK(art.result.ok);
    CHECK(art.oracle_match);
  }
  CHECK(art.row.n == 64);
  CHECK(art.row.total_msgs > 0);
  CHECK(art.row.baseline_bytes > double(art.row.total_bytes));
}

TEST_CASE("sweep marks infeasible sizes instead of failing") {
  RunConfig c;
  c.tau_frac = 0.0;
  auto rows = sweep_scaling({8, 64}, c);
  REQUIRE(rows.size() == 2);
  CHECK(!rows[0].error.empty());  // 8 nodes cannot form two clusters of 12
  CHECK(rows[1].error.empty());
  CHECK(to_csv(rows[0]).find("ERROR") != std::string::npos);
}

TEST_CASE("partition monte carlo: no adversary means certainty") {
  auto res = montecarlo_partition(128, 0.0, 8, 200, 1);
  CHECK(res.frequency == 1.0);
  CHECK(res.exact_union_lower == 1.0);
}

TEST_CASE("partition monte carlo: clusters of two fail often at tau 0.4") {
  auto res = montecarlo_partition(100, 0.4, 2, 500, 2);
  CHECK(res.frequency < 0.5);
}

TEST_CASE("partition monte carlo agrees with the exact hypergeometric tails") {
  auto res = montecarlo_partition(1024, 0.3, 40, 1000, 3);

  // Independent exact computation, cluster by cluster.
  std::vector<uint32_t> sizes(1024 / 40, 40);
  sizes.back() += 1024 % 40;
  double union_fail = 0, prod_ok = 1;
  for (size_t i = 0; i < sizes.size(); ++i) {
    uint32_t sz = sizes[i];
    double tail = exact_tail(1024, 307, sz, sz / 2 + sz % 2);
    CHECK(res.cluster_fail_tails[i] == doctest::Approx(tail).epsilon(1e-9));
    union_fail += tail;
    prod_ok *= 1 - tail;
  }
  CHECK(res.exact_union_lower == doctest::Approx(1 - union_fail).epsilon(1e-9));

  // The measured frequency sits within 3 standard errors of the
  // independence approximation, and above the union lower bound.
  CHECK(std::abs(res.frequency - prod_ok) <= 3 * res.std_error + 0.01);
  CHECK(res.frequency >= res.exact_union_lower - 3 * res.std_error);
}

TEST_CASE("lower bound: no adversary, no surrounded nodes") {
  LowerBoundConfig cfg;
  cfg.n = 1000;
  cfg.epsilon = 0.0;
  cfg.trials = 20;
  auto res = lowerbound_demo(cfg);
  CHECK(res.surrounded_frequency == 0.0);
}

TEST_CASE("lower bound: single-recipient senders at epsilon 0.5 are surrounded") {
  LowerBoundConfig cfg;
  cfg.n = 1000;
  cfg.epsilon = 0.5;
  cfg.omega_plus = 1;
  cfg.trials = 50;
  auto res = lowerbound_demo(cfg);
  CHECK(res.mean_disjoint_sets > 100);
  CHECK(res.closed_form > 0.999);
  CHECK(res.surrounded_frequency == 1.0);
}

TEST_CASE("lower bound matches the closed form at the acceptance preset") {
  LowerBoundConfig cfg;
  cfg.n = 10000;
  cfg.epsilon = 0.3;
  cfg.omega_plus = 2;
  cfg.trials = 50;
  auto res = lowerbound_demo(cfg);
  CHECK(res.surrounded_frequency >= 0.99);
  CHECK(std::abs(res.surrounded_frequency - res.closed_form) <=
        3 * res.std_error + 1e-6);
}
