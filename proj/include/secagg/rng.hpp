#pragma once

#include <random>
#include <string_view>

#include "secagg/sha256.hpp"

namespace secagg {

/// Deterministic RNG. Everything in the simulator draws from one of these;
/// all seeds derive from the run seed so reruns are byte-identical.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  /// Uniform in [0, bound). bound = 0 means the full 64-bit range.
  uint64_t below(uint64_t bound) {
    if (bound == 0) return gen_();
    // Rejection sampling to stay unbiased.
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % bound;
  }

  double unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  bool coin(double p) { return unit() < p; }

  void fill(Bytes& out, size_t n) {
    out.clear();
    out.reserve(n);
    while (out.size() < n) {
      uint64_t v = gen_();
      for (int i = 0; i < 8 && out.size() < n; ++i)
        out.push_back(static_cast<uint8_t>(v >> (8 * (7 - i))));
    }
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// Domain-separated child seed: hash of (parent seed, label, indices).
inline uint64_t derive_seed(uint64_t parent, std::string_view label, uint64_t a = 0,
                            uint64_t b = 0) {
  Sha256 h;
  h.update_u64(parent).update(label).update_u64(a).update_u64(b);
  return digest_to_u64(h.finish());
}

}  // namespace secagg
