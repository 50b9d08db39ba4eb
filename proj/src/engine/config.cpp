#include "secagg/engine/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace secagg::engine {

using nlohmann::json;

crypto::Backend RunConfig::backend_enum() const {
  if (backend == "mock") return crypto::Backend::Mock;
  if (backend == "real") return crypto::Backend::Real;
  throw std::invalid_argument("backend must be mock or real");
}

comm::BroadcastStrategy RunConfig::strategy_enum() const {
  if (strategy == "dolev_strong") return comm::BroadcastStrategy::DolevStrong;
  if (strategy == "double_echo") return comm::BroadcastStrategy::DoubleEcho;
  throw std::invalid_argument("strategy must be dolev_strong or double_echo");
}

net::CorruptionStrategy RunConfig::corruption_enum() const {
  if (corruption == "uniform") return net::CorruptionStrategy::UniformRandom;
  if (corruption == "targeted") return net::CorruptionStrategy::TargetedCluster;
  if (corruption == "join_order") return net::CorruptionStrategy::JoinOrder;
  throw std::invalid_argument("corruption must be uniform, targeted or join_order");
}

crypto::SecurityParams RunConfig::security_params() const {
  crypto::SecurityParams p;
  p.modulus_bits = modulus_bits;
  p.nominal_ciphertext_bits = nominal_ciphertext_bits;
  p.validate();
  return p;
}

std::vector<net::Behavior> RunConfig::behavior_pool() const {
  if (behaviors.empty()) return net::full_misbehavior_suite();
  std::vector<net::Behavior> pool;
  for (const auto& name : behaviors) pool.push_back(net::behavior_from_name(name));
  return pool;
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  RunConfig c;
  c.n = j.value("n", c.n);
  c.tau_frac = j.value("tau_frac", c.tau_frac);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.k_cluster = j.value("k_cluster", c.k_cluster);
  c.log_base = j.value("log_base", c.log_base);
  if (j.contains("domain")) c.domain = j.at("domain").get<std::vector<uint64_t>>();
  c.backend = j.value("backend", c.backend);
  c.modulus_bits = j.value("modulus_bits", c.modulus_bits);
  c.nominal_ciphertext_bits = j.value("nominal_ciphertext_bits", c.nominal_ciphertext_bits);
  c.seed = j.value("seed", c.seed);
  if (j.contains("behaviors"))
    c.behaviors = j.at("behaviors").get<std::vector<std::string>>();
  c.corruption = j.value("corruption", c.corruption);
  if (j.contains("target_clusters"))
    c.target_clusters = j.at("target_clusters").get<std::vector<uint32_t>>();
  c.layout = j.value("layout", c.layout);
  c.strategy = j.value("strategy", c.strategy);
  c.unsafe_tau = j.value("unsafe_tau", c.unsafe_tau);
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string RunConfig::to_json() const {
  json j;
  j["n"] = n;
  j["tau_frac"] = tau_frac;
  j["epsilon"] = epsilon;
  j["k_cluster"] = k_cluster;
  j["log_base"] = log_base;
  j["domain"] = domain;
  j["backend"] = backend;
  j["modulus_bits"] = modulus_bits;
  j["nominal_ciphertext_bits"] = nominal_ciphertext_bits;
  j["seed"] = seed;
  j["behaviors"] = behaviors;
  j["corruption"] = corruption;
  j["target_clusters"] = target_clusters;
  j["layout"] = layout;
  j["strategy"] = strategy;
  j["unsafe_tau"] = unsafe_tau;
  return j.dump(2);
}

}  // namespace secagg::engine
