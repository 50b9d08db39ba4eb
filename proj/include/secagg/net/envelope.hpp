#pragma once

#include "secagg/common.hpp"
#include "secagg/overlay/overlay.hpp"

namespace secagg::net {

using overlay::NodeId;

enum class Phase : uint32_t {
  Idle = 0,
  Bootstrap,
  Maintain,
  Setup,
  Submit,
  Local,
  Ring,
  Decrypt,
  Result,
  Experiment,
};

const char* phase_name(Phase p);

struct RoundTag {
  uint32_t epoch = 0;
  uint32_t phase = 0;
  uint32_t seq = 0;

  auto operator<=>(const RoundTag&) const = default;
};

// Wire format: sender 8B | receiver 8B | round tag 12B | payload length 4B |
// payload | 64B signature placeholder. The signature bytes are accounted but
// unforgeability is enforced structurally by the simulator.
inline constexpr uint32_t kEnvelopeHeaderBytes = 8 + 8 + 12 + 4;
inline constexpr uint32_t kSignatureBytes = 64;

struct Envelope {
  NodeId sender = 0;
  NodeId receiver = 0;
  RoundTag tag;
  Bytes payload;
  // Metrics size of the payload; real ciphertext bytes rather than the mock
  // stand-in. Zero means payload.size().
  uint32_t nominal_bytes = 0;

  uint32_t payload_nominal() const {
    return nominal_bytes ? nominal_bytes : static_cast<uint32_t>(payload.size());
  }
  uint64_t wire_bytes() const {
    return kEnvelopeHeaderBytes + payload_nominal() + kSignatureBytes;
  }
};

}  // namespace secagg::net
