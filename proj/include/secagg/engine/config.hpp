#pragma once

#include <string>

#include "secagg/comm/broadcast.hpp"
#include "secagg/crypto/crypto.hpp"
#include "secagg/net/adversary.hpp"

namespace secagg::engine {

/// One experiment's knobs, loadable from a JSON config file.
struct RunConfig {
  uint32_t n = 64;
  double tau_frac = 0.25;
  double epsilon = 0.1;
  uint32_t k_cluster = 2;
  double log_base = 2.0;
  std::vector<uint64_t> domain = {0, 1};
  std::string backend = "mock";  // mock | real
  uint32_t modulus_bits = 128;
  uint32_t nominal_ciphertext_bits = 0;
  uint64_t seed = 1;
  std::vector<std::string> behaviors;  // empty = full misbehavior suite
  std::string corruption = "uniform";  // uniform | targeted | join_order
  std::vector<uint32_t> target_clusters;
  std::string layout = "hash";            // hash | bootstrap
  std::string strategy = "dolev_strong";  // dolev_strong | double_echo
  bool unsafe_tau = false;

  crypto::Backend backend_enum() const;
  comm::BroadcastStrategy strategy_enum() const;
  net::CorruptionStrategy corruption_enum() const;
  crypto::SecurityParams security_params() const;
  std::vector<net::Behavior> behavior_pool() const;

  static RunConfig from_json(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string to_json() const;
};

}  // namespace secagg::engine
