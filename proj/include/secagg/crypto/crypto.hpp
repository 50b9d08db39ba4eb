#pragma once

#include <optional>
#include <vector>

#include "secagg/bigint.hpp"
#include "secagg/common.hpp"
#include "secagg/rng.hpp"

namespace secagg::crypto {

enum class Backend : uint8_t { Mock = 0, Real = 1 };

/// Parameters of the real (threshold Paillier) backend. Moduli below 512 bits
/// are insecure and intended for tests only; 1024 matches a deployment-grade
/// setting. nominal_ciphertext_bits drives byte accounting for both backends
/// so mock runs report the same traffic a real run would.
struct SecurityParams {
  uint32_t modulus_bits = 128;
  uint32_t nominal_ciphertext_bits = 0;  // 0 -> 2 * modulus_bits

  uint32_t nominal_ct_bits() const {
    return nominal_ciphertext_bits ? nominal_ciphertext_bits : 2 * modulus_bits;
  }
  uint32_t nominal_ct_bytes() const { return (nominal_ct_bits() + 7) / 8; }
  void validate() const;
};

/// Ordered list of admissible plaintexts (the poll choices, already encoded).
struct ValueDomain {
  std::vector<uint64_t> values;

  void validate() const;
  bool contains(uint64_t v) const;
  uint64_t max_value() const { return values.back(); }
  Bytes to_bytes() const;
};

struct InsufficientSharesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BackendMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Ciphertext;
struct MockBackend;
struct PaillierBackend;

struct PublicKey {
  Backend backend = Backend::Mock;
  SecurityParams params;
  uint32_t threshold = 0;    // t
  uint32_t share_count = 0;  // m

  // Real backend key material.
  Int n, n_squared, generator;        // generator = n + 1
  Int v;                              // verifier base, square in Z*_{n^2}
  Int delta;                          // share_count!
  Int theta;                          // (4 delta^2)^-1 mod n
  std::vector<Int> verification_keys; // v_i = v^(delta s_i), index 1..m

  // Mock backend: public keygen tag binding shares/proofs to this key.
  Bytes mock_tag;

  Int plaintext_space() const;
  Bytes to_bytes() const;
  static PublicKey from_bytes(std::span<const uint8_t> b);
  uint64_t fingerprint() const;
};

struct SecretShare {
  uint32_t index = 0;  // 1-based holder index
  Backend backend = Backend::Mock;
  Int value;           // real: polynomial share s_i
  Bytes mock_tag;
  uint64_t key_fingerprint = 0;
};

/// Opaque encrypted payload. Only the two backend implementations interpret
/// the bytes; protocol code moves ciphertexts around and compares them.
class Ciphertext {
 public:
  Ciphertext() = default;

  Backend backend() const { return backend_; }
  const Bytes& bytes() const { return bytes_; }
  bool operator==(const Ciphertext&) const = default;

  static Ciphertext deserialize(Backend backend, std::span<const uint8_t> b);

 private:
  Ciphertext(Backend backend, Bytes b) : backend_(backend), bytes_(std::move(b)) {}
  Backend backend_ = Backend::Mock;
  Bytes bytes_;
  friend struct MockBackend;
  friend struct PaillierBackend;
};

struct MembershipProof {
  Bytes transcript;
};

struct ShareProof {
  Bytes transcript;
};

struct DecryptionShare {
  uint32_t index = 0;
  Bytes payload;  // real: c_i big-endian; mock: sealed plaintext assertion
  ShareProof proof;
};

struct KeygenResult {
  PublicKey pk;
  std::vector<SecretShare> shares;  // holder indices 1..m
};

// ---------------------------------------------------------------------------
// Operations. All deterministic functions of (arguments, seed).

KeygenResult keygen(Backend backend, const SecurityParams& params, uint32_t t,
                    uint32_t m, uint64_t seed);

Ciphertext encrypt(const PublicKey& pk, uint64_t value, uint64_t seed);

Ciphertext add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);

Ciphertext scale(const PublicKey& pk, const Ciphertext& c, uint64_t factor);

/// Encrypt `value` and attach a 1-of-d plaintext membership proof bound to the
/// ciphertext, the domain and the key. Proving a value outside the domain
/// succeeds but yields a transcript that verify_membership rejects.
std::pair<Ciphertext, MembershipProof> prove_membership(const PublicKey& pk,
                                                        uint64_t value, uint64_t seed,
                                                        const ValueDomain& domain);

bool verify_membership(const PublicKey& pk, const Ciphertext& c,
                       const ValueDomain& domain, const MembershipProof& proof);

DecryptionShare share_decrypt(const PublicKey& pk, const SecretShare& share,
                              const Ciphertext& c, uint64_t seed);

bool verify_share(const PublicKey& pk, const Ciphertext& c, const DecryptionShare& ds);

/// Combine at least t proof-valid decryption shares into the plaintext.
/// Shares failing verification are discarded before the count check.
uint64_t combine(const PublicKey& pk, const Ciphertext& c,
                 const std::vector<DecryptionShare>& shares);

/// Hash of the length-prefixed concatenation of ciphertexts, in list order.
uint64_t derive_common_randomness(std::span<const Ciphertext> cts);

/// Simulator-oracle access to a mock plaintext. Protocol code must never call
/// this; it exists so test harnesses can check totals against ground truth.
uint64_t oracle_open_mock(const Ciphertext& c);

// Nominal wire sizes used for byte accounting, identical for both backends.
uint32_t nominal_ciphertext_bytes(const SecurityParams& p);
uint32_t nominal_membership_proof_bytes(const SecurityParams& p, size_t domain_size);
uint32_t nominal_share_proof_bytes(const SecurityParams& p);
uint32_t nominal_decryption_share_bytes(const SecurityParams& p);
uint32_t nominal_public_key_bytes(const SecurityParams& p, uint32_t share_count);

}  // namespace secagg::crypto
