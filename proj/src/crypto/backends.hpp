#pragma once

#include "secagg/crypto/crypto.hpp"

namespace secagg::crypto {

// Transparent backend: the "ciphertext" carries its plaintext and a nonce in
// the clear, sealed only by type visibility, so protocol logic can be tested
// without big-integer cost. Proofs are plaintext assertions that can only be
// checked through the verify entry points.
struct MockBackend {
  static constexpr uint64_t kSpace = uint64_t{1} << 63;

  static KeygenResult keygen(const SecurityParams& params, uint32_t t, uint32_t m,
                             uint64_t seed);
  static Ciphertext encrypt(const PublicKey& pk, uint64_t value, uint64_t seed);
  static Ciphertext add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);
  static Ciphertext scale(const PublicKey& pk, const Ciphertext& c, uint64_t factor);
  static MembershipProof prove_membership(const PublicKey& pk, const Ciphertext& c,
                                          const ValueDomain& domain);
  static bool verify_membership(const PublicKey& pk, const Ciphertext& c,
                                const ValueDomain& domain, const MembershipProof& proof);
  static DecryptionShare share_decrypt(const PublicKey& pk, const SecretShare& share,
                                       const Ciphertext& c);
  static bool verify_share(const PublicKey& pk, const Ciphertext& c,
                           const DecryptionShare& ds);
  static uint64_t combine_valid(const PublicKey& pk, const Ciphertext& c,
                                const std::vector<const DecryptionShare*>& valid);
  static uint64_t open(const Ciphertext& c);
  static Ciphertext make(const PublicKey& pk, uint64_t value, uint64_t nonce);
};

// Threshold Paillier with dealer keygen: safe-prime modulus n = pq, shares of
// the decryption exponent d (d = 0 mod p'q', d = 1 mod n) on a degree t-1
// polynomial, Shamir reconstruction in the exponent with the m! clearing
// factor. Membership proofs are Fiat-Shamir 1-of-d n-th residue proofs;
// decryption shares carry an equality-of-discrete-log proof against the
// published verification keys.
struct PaillierBackend {
  static KeygenResult keygen(const SecurityParams& params, uint32_t t, uint32_t m,
                             uint64_t seed);
  static Ciphertext encrypt(const PublicKey& pk, uint64_t value, uint64_t seed);
  static Ciphertext add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);
  static Ciphertext scale(const PublicKey& pk, const Ciphertext& c, uint64_t factor);
  static std::pair<Ciphertext, MembershipProof> prove_membership(const PublicKey& pk,
                                                                 uint64_t value,
                                                                 uint64_t seed,
                                                                 const ValueDomain& domain);
  static bool verify_membership(const PublicKey& pk, const Ciphertext& c,
                                const ValueDomain& domain, const MembershipProof& proof);
  static DecryptionShare share_decrypt(const PublicKey& pk, const SecretShare& share,
                                       const Ciphertext& c, uint64_t seed);
  static bool verify_share(const PublicKey& pk, const Ciphertext& c,
                           const DecryptionShare& ds);
  static uint64_t combine_valid(const PublicKey& pk, const Ciphertext& c,
                                const std::vector<const DecryptionShare*>& valid);

  static unsigned challenge_bits(const SecurityParams& p);
  static Int ct_value(const PublicKey& pk, const Ciphertext& c);
  static Ciphertext make(const PublicKey& pk, const Int& value);
};

}  // namespace secagg::crypto
