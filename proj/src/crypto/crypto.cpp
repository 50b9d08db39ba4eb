#include "secagg/crypto/crypto.hpp"

#include <algorithm>
#include <map>

#include "src/crypto/backends.hpp"

namespace secagg::crypto {

void SecurityParams::validate() const {
  if (modulus_bits < 16) throw std::invalid_argument("modulus_bits must be >= 16");
  if (modulus_bits % 2 != 0) throw std::invalid_argument("modulus_bits must be even");
  if (nominal_ciphertext_bits != 0 && nominal_ciphertext_bits < modulus_bits)
    throw std::invalid_argument("nominal_ciphertext_bits below modulus_bits");
}

void ValueDomain::validate() const {
  if (values.empty()) throw std::invalid_argument("empty value domain");
  for (size_t i = 1; i < values.size(); ++i)
    if (values[i] <= values[i - 1])
      throw std::invalid_argument("domain values must be strictly increasing");
}

bool ValueDomain::contains(uint64_t v) const {
  return std::binary_search(values.begin(), values.end(), v);
}

Bytes ValueDomain::to_bytes() const {
  Bytes out;
  put_u32(out, static_cast<uint32_t>(values.size()));
  for (uint64_t v : values) put_u64(out, v);
  return out;
}

Int PublicKey::plaintext_space() const {
  if (backend == Backend::Mock) return Int(MockBackend::kSpace);
  return n;
}

Bytes PublicKey::to_bytes() const {
  Bytes out;
  out.push_back(static_cast<uint8_t>(backend));
  put_u32(out, params.modulus_bits);
  put_u32(out, params.nominal_ciphertext_bits);
  put_u32(out, threshold);
  put_u32(out, share_count);
  if (backend == Backend::Mock) {
    put_bytes(out, mock_tag);
  } else {
    put_bytes(out, bigint::to_bytes(n));
    put_bytes(out, bigint::to_bytes(v));
    put_bytes(out, bigint::to_bytes(theta));
    for (const Int& vk : verification_keys) put_bytes(out, bigint::to_bytes(vk));
  }
  return out;
}

PublicKey PublicKey::from_bytes(std::span<const uint8_t> b) {
  ByteReader r(b);
  PublicKey pk;
  pk.backend = static_cast<Backend>(r.u8());
  pk.params.modulus_bits = r.u32();
  pk.params.nominal_ciphertext_bits = r.u32();
  pk.threshold = r.u32();
  pk.share_count = r.u32();
  if (pk.backend == Backend::Mock) {
    pk.mock_tag = r.bytes();
  } else {
    pk.n = bigint::from_bytes(r.bytes());
    pk.v = bigint::from_bytes(r.bytes());
    pk.theta = bigint::from_bytes(r.bytes());
    pk.n_squared = pk.n * pk.n;
    pk.generator = pk.n + 1;
    pk.delta = 1;
    for (uint32_t i = 2; i <= pk.share_count; ++i) pk.delta *= i;
    pk.verification_keys.reserve(pk.share_count);
    for (uint32_t i = 0; i < pk.share_count; ++i)
      pk.verification_keys.push_back(bigint::from_bytes(r.bytes()));
  }
  r.expect_done();
  return pk;
}

uint64_t PublicKey::fingerprint() const {
  Bytes b = to_bytes();
  return digest_to_u64(sha256(b));
}

Ciphertext Ciphertext::deserialize(Backend backend, std::span<const uint8_t> b) {
  if (backend == Backend::Mock) {
    if (b.size() != 16) throw ParseError("mock ciphertext must be 16 bytes");
    ByteReader r(b);
    uint64_t value = r.u64() & (MockBackend::kSpace - 1);
    uint64_t nonce = r.u64();
    Bytes canon;
    put_u64(canon, value);
    put_u64(canon, nonce);
    return Ciphertext(backend, std::move(canon));
  }
  return Ciphertext(backend, Bytes(b.begin(), b.end()));
}

namespace {

void check_parties(uint32_t t, uint32_t m) {
  if (t <= 1 || t > m) throw std::invalid_argument("threshold must satisfy 1 < t <= m");
}

void check_backend(const PublicKey& pk, const Ciphertext& c) {
  if (pk.backend != c.backend()) throw BackendMismatchError("ciphertext backend mismatch");
}

}  // namespace

KeygenResult keygen(Backend backend, const SecurityParams& params, uint32_t t,
                    uint32_t m, uint64_t seed) {
  params.validate();
  check_parties(t, m);
  if (backend == Backend::Mock) return MockBackend::keygen(params, t, m, seed);
  return PaillierBackend::keygen(params, t, m, seed);
}

Ciphertext encrypt(const PublicKey& pk, uint64_t value, uint64_t seed) {
  if (Int(value) >= pk.plaintext_space())
    throw std::out_of_range("plaintext outside the plaintext space");
  if (pk.backend == Backend::Mock) return MockBackend::encrypt(pk, value, seed);
  return PaillierBackend::encrypt(pk, value, seed);
}

Ciphertext add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  check_backend(pk, a);
  check_backend(pk, b);
  if (pk.backend == Backend::Mock) return MockBackend::add(pk, a, b);
  return PaillierBackend::add(pk, a, b);
}

Ciphertext scale(const PublicKey& pk, const Ciphertext& c, uint64_t factor) {
  check_backend(pk, c);
  if (pk.backend == Backend::Mock) return MockBackend::scale(pk, c, factor);
  return PaillierBackend::scale(pk, c, factor);
}

std::pair<Ciphertext, MembershipProof> prove_membership(const PublicKey& pk,
                                                        uint64_t value, uint64_t seed,
                                                        const ValueDomain& domain) {
  domain.validate();
  if (pk.backend == Backend::Mock) {
    Ciphertext c = encrypt(pk, value, seed);
    return {c, MockBackend::prove_membership(pk, c, domain)};
  }
  return PaillierBackend::prove_membership(pk, value, seed, domain);
}

bool verify_membership(const PublicKey& pk, const Ciphertext& c,
                       const ValueDomain& domain, const MembershipProof& proof) {
  if (pk.backend != c.backend()) return false;
  try {
    if (pk.backend == Backend::Mock)
      return MockBackend::verify_membership(pk, c, domain, proof);
    return PaillierBackend::verify_membership(pk, c, domain, proof);
  } catch (const ParseError&) {
    return false;
  }
}

DecryptionShare share_decrypt(const PublicKey& pk, const SecretShare& share,
                              const Ciphertext& c, uint64_t seed) {
  check_backend(pk, c);
  if (share.backend != pk.backend || share.key_fingerprint != pk.fingerprint())
    throw BackendMismatchError("secret share does not match this public key");
  if (pk.backend == Backend::Mock) return MockBackend::share_decrypt(pk, share, c);
  return PaillierBackend::share_decrypt(pk, share, c, seed);
}

bool verify_share(const PublicKey& pk, const Ciphertext& c, const DecryptionShare& ds) {
  if (pk.backend != c.backend()) return false;
  if (ds.index < 1 || ds.index > pk.share_count) return false;
  try {
    if (pk.backend == Backend::Mock) return MockBackend::verify_share(pk, c, ds);
    return PaillierBackend::verify_share(pk, c, ds);
  } catch (const ParseError&) {
    return false;
  }
}

uint64_t combine(const PublicKey& pk, const Ciphertext& c,
                 const std::vector<DecryptionShare>& shares) {
  check_backend(pk, c);
  // Discard invalid shares, then keep the first valid share per holder index.
  std::map<uint32_t, const DecryptionShare*> by_index;
  for (const DecryptionShare& ds : shares)
    if (verify_share(pk, c, ds)) by_index.emplace(ds.index, &ds);
  if (by_index.size() < pk.threshold)
    throw InsufficientSharesError("fewer than t valid decryption shares");
  std::vector<const DecryptionShare*> valid;
  for (auto& [idx, ds] : by_index) {
    valid.push_back(ds);
    if (valid.size() == pk.threshold) break;
  }
  if (pk.backend == Backend::Mock) return MockBackend::combine_valid(pk, c, valid);
  return PaillierBackend::combine_valid(pk, c, valid);
}

uint64_t derive_common_randomness(std::span<const Ciphertext> cts) {
  if (cts.empty()) throw std::invalid_argument("empty ciphertext list");
  Sha256 h;
  for (const Ciphertext& c : cts) {
    h.update_u32(static_cast<uint32_t>(c.bytes().size()));
    h.update(c.bytes());
  }
  return digest_to_u64(h.finish());
}

uint64_t oracle_open_mock(const Ciphertext& c) {
  if (c.backend() != Backend::Mock)
    throw BackendMismatchError("oracle_open_mock needs a mock ciphertext");
  return MockBackend::open(c);
}

uint32_t nominal_ciphertext_bytes(const SecurityParams& p) { return p.nominal_ct_bytes(); }

uint32_t nominal_membership_proof_bytes(const SecurityParams& p, size_t domain_size) {
  // Per disjunction branch: challenge (16) + response in Z_n.
  return static_cast<uint32_t>(domain_size) * (16 + p.modulus_bits / 8);
}

uint32_t nominal_share_proof_bytes(const SecurityParams& p) {
  return 32 + (3 * p.modulus_bits / 8 + 32);
}

uint32_t nominal_decryption_share_bytes(const SecurityParams& p) {
  return p.nominal_ct_bytes();
}

uint32_t nominal_public_key_bytes(const SecurityParams& p, uint32_t share_count) {
  // n, v, theta and one verification key per holder.
  return 2 * p.nominal_ct_bytes() + p.modulus_bits / 8 +
         share_count * p.nominal_ct_bytes() + 17;
}

}  // namespace secagg::crypto
