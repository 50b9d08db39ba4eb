#include "doctest.h"
#include "secagg/crypto/crypto.hpp"

using namespace secagg;
using namespace secagg::crypto;

namespace {

KeygenResult mock_keys(uint32_t t = 3, uint32_t m = 5, uint64_t seed = 1) {
  SecurityParams p;
  return keygen(Backend::Mock, p, t, m, seed);
}

}  // namespace

TEST_CASE("keygen rejects bad thresholds") {
  SecurityParams p;
  CHECK_THROWS_AS(keygen(Backend::Mock, p, 1, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(keygen(Backend::Mock, p, 6, 5, 1), std::invalid_argument);
}

TEST_CASE("threshold semantics: t shares decrypt, t-1 do not") {
  auto kg = mock_keys(3, 5, 1);
  Ciphertext c = encrypt(kg.pk, 7, 11);
  std::vector<DecryptionShare> shares;
  for (uint32_t i : {0u, 1u, 2u})
    shares.push_back(share_decrypt(kg.pk, kg.shares[i], c, 100 + i));
  CHECK(combine(kg.pk, c, shares) == 7);
  shares.pop_back();
  CHECK_THROWS_AS(combine(kg.pk, c, shares), InsufficientSharesError);
}

TEST_CASE("encryption is probabilistic across seeds, deterministic per seed") {
  auto kg = mock_keys();
  CHECK(encrypt(kg.pk, 5, 1).bytes() != encrypt(kg.pk, 5, 2).bytes());
  CHECK(encrypt(kg.pk, 5, 1).bytes() == encrypt(kg.pk, 5, 1).bytes());
  CHECK_THROWS_AS(encrypt(kg.pk, uint64_t{1} << 63, 1), std::out_of_range);
}

TEST_CASE("homomorphism, 10^4 random cases") {
  auto kg = mock_keys();
  constexpr uint64_t kSpace = uint64_t{1} << 63;
  Rng rng(42);
  for (int i = 0; i < 10000; ++i) {
    uint64_t a = rng.below(kSpace), b = rng.below(kSpace);
    Ciphertext sum = add(kg.pk, encrypt(kg.pk, a, 2 * i), encrypt(kg.pk, b, 2 * i + 1));
    CHECK(oracle_open_mock(sum) == (a + b) % kSpace);
    uint64_t k = rng.below(1000);
    Ciphertext scaled = scale(kg.pk, encrypt(kg.pk, a, i), k);
    CHECK(oracle_open_mock(scaled) ==
          static_cast<uint64_t>((static_cast<unsigned __int128>(a) * k) % kSpace));
  }
}

TEST_CASE("add and scale identities") {
  auto kg = mock_keys();
  Ciphertext c = encrypt(kg.pk, 9, 3);
  CHECK(oracle_open_mock(add(kg.pk, encrypt(kg.pk, 0, 4), c)) == 9);
  CHECK(oracle_open_mock(scale(kg.pk, c, 1)) == 9);
  CHECK(oracle_open_mock(scale(kg.pk, c, 0)) == 0);
}

TEST_CASE("add never re-randomizes: byte-identical inputs, byte-identical outputs") {
  auto kg = mock_keys();
  Ciphertext a = encrypt(kg.pk, 2, 5), b = encrypt(kg.pk, 3, 6);
  CHECK(add(kg.pk, a, b).bytes() == add(kg.pk, a, b).bytes());
  CHECK(scale(kg.pk, a, 7).bytes() == scale(kg.pk, a, 7).bytes());
  CHECK(oracle_open_mock(add(kg.pk, a, b)) == 5);
}

TEST_CASE("membership proofs accept members and reject outsiders, exactly") {
  auto kg = mock_keys();
  ValueDomain domain{{0, 1}};
  auto [c1, p1] = prove_membership(kg.pk, 1, 7, domain);
  CHECK(verify_membership(kg.pk, c1, domain, p1));

  // Proving 5 in {0,1} produces a transcript the verifier rejects.
  auto [c5, p5] = prove_membership(kg.pk, 5, 8, domain);
  CHECK_FALSE(verify_membership(kg.pk, c5, domain, p5));

  // Proof bound to the ciphertext bytes: swapping ciphertexts fails.
  auto [c0, p0] = prove_membership(kg.pk, 0, 9, domain);
  CHECK_FALSE(verify_membership(kg.pk, c1, domain, p0));

  CHECK_FALSE(verify_membership(kg.pk, c1, domain, MembershipProof{}));
}

TEST_CASE("mock membership verification is exact: accept iff the plaintext is in the domain") {
  auto kg = mock_keys();
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    ValueDomain domain;
    uint64_t v = rng.below(50);
    for (int j = 0; j < 4; ++j) {
      domain.values.push_back(v);
      v += 1 + rng.below(20);
    }
    uint64_t value = rng.below(120);
    auto [c, proof] = prove_membership(kg.pk, value, 5000 + i, domain);
    CHECK(verify_membership(kg.pk, c, domain, proof) == domain.contains(value));
  }
}

TEST_CASE("tampered decryption shares are rejected") {
  auto kg = mock_keys(3, 5, 2);
  Ciphertext c = encrypt(kg.pk, 7, 1);
  auto ds = share_decrypt(kg.pk, kg.shares[0], c, 5);
  CHECK(verify_share(kg.pk, c, ds));
  auto bad = ds;
  bad.payload[3] ^= 1;
  CHECK_FALSE(verify_share(kg.pk, c, bad));
  auto bad2 = ds;
  bad2.proof.transcript[0] ^= 1;
  CHECK_FALSE(verify_share(kg.pk, c, bad2));
}

TEST_CASE("combine discards garbage shares before counting") {
  auto kg = mock_keys(3, 5, 3);
  Ciphertext c = encrypt(kg.pk, 7, 1);
  std::vector<DecryptionShare> shares;
  shares.push_back(share_decrypt(kg.pk, kg.shares[0], c, 1));
  shares.push_back(share_decrypt(kg.pk, kg.shares[1], c, 2));
  DecryptionShare garbage;
  garbage.index = 3;
  garbage.payload = {1, 2, 3};
  garbage.proof.transcript = {4, 5, 6};
  shares.push_back(garbage);
  shares.push_back(share_decrypt(kg.pk, kg.shares[3], c, 4));
  CHECK(combine(kg.pk, c, shares) == 7);

  // Without the fourth honest share only two valid ones remain.
  shares.pop_back();
  CHECK_THROWS_AS(combine(kg.pk, c, shares), InsufficientSharesError);
}

TEST_CASE("shares are bound to their keygen") {
  auto kg1 = mock_keys(2, 3, 1);
  auto kg2 = mock_keys(2, 3, 9);
  Ciphertext c = encrypt(kg1.pk, 1, 1);
  CHECK_THROWS_AS(share_decrypt(kg1.pk, kg2.shares[0], c, 3), BackendMismatchError);
}

TEST_CASE("derive_common_randomness golden vector") {
  Bytes b1, b2;
  put_u64(b1, 5);
  put_u64(b1, 0x1122334455667788ull);
  put_u64(b2, 7);
  put_u64(b2, 0x99aabbccddeeff00ull);
  std::vector<Ciphertext> cts{Ciphertext::deserialize(Backend::Mock, b1),
                              Ciphertext::deserialize(Backend::Mock, b2)};
  CHECK(derive_common_randomness(cts) == 0x35e37abd56723bf4ull);

  // Order matters, determinism holds.
  std::vector<Ciphertext> swapped{cts[1], cts[0]};
  CHECK(derive_common_randomness(swapped) != derive_common_randomness(cts));
  CHECK(derive_common_randomness(cts) == derive_common_randomness(cts));
  CHECK_THROWS_AS(derive_common_randomness({}), std::invalid_argument);
}

TEST_CASE("public key serialization round-trips") {
  auto kg = mock_keys(3, 5, 21);
  auto pk2 = PublicKey::from_bytes(kg.pk.to_bytes());
  CHECK(pk2.to_bytes() == kg.pk.to_bytes());
  CHECK(pk2.fingerprint() == kg.pk.fingerprint());
  CHECK(pk2.threshold == 3);
  CHECK(pk2.share_count == 5);
}
