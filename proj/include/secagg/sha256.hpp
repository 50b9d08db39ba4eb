#pragma once

#include <array>
#include <span>
#include <string_view>

#include "secagg/common.hpp"

namespace secagg {

using Digest = std::array<uint8_t, 32>;

/// Incremental SHA-256 (OpenSSL EVP underneath).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const uint8_t> data);
  Sha256& update(std::string_view s);
  Sha256& update_u32(uint32_t v);
  Sha256& update_u64(uint64_t v);
  Digest finish();

 private:
  void* ctx_;
};

Digest sha256(std::span<const uint8_t> data);

/// First 8 bytes of the digest, big-endian. Used wherever a hash has to be
/// collapsed into an RNG seed or a short tag.
uint64_t digest_to_u64(const Digest& d);

}  // namespace secagg
