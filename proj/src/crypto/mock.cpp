#include "src/crypto/backends.hpp"

namespace secagg::crypto {

namespace {

uint64_t mock_value(const Ciphertext& c) {
  ByteReader r(c.bytes());
  return r.u64();
}

uint64_t mock_nonce(const Ciphertext& c) {
  ByteReader r(c.bytes());
  r.u64();
  return r.u64();
}

Digest membership_marker(const PublicKey& pk, const Ciphertext& c,
                         const ValueDomain& domain) {
  Sha256 h;
  h.update("secagg.mock.membership");
  h.update(pk.mock_tag);
  h.update_u32(static_cast<uint32_t>(c.bytes().size()));
  h.update(c.bytes());
  h.update(domain.to_bytes());
  return h.finish();
}

Digest share_marker(const PublicKey& pk, uint32_t index, const Ciphertext& c,
                    uint64_t value) {
  Sha256 h;
  h.update("secagg.mock.share");
  h.update(pk.mock_tag);
  h.update_u32(index);
  h.update_u32(static_cast<uint32_t>(c.bytes().size()));
  h.update(c.bytes());
  h.update_u64(value);
  return h.finish();
}

}  // namespace

Ciphertext MockBackend::make(const PublicKey& pk, uint64_t value, uint64_t nonce) {
  (void)pk;
  Ciphertext c;
  c.backend_ = Backend::Mock;
  put_u64(c.bytes_, value % kSpace);
  put_u64(c.bytes_, nonce);
  return c;
}

KeygenResult MockBackend::keygen(const SecurityParams& params, uint32_t t, uint32_t m,
                                 uint64_t seed) {
  KeygenResult out;
  out.pk.backend = Backend::Mock;
  out.pk.params = params;
  out.pk.threshold = t;
  out.pk.share_count = m;
  Sha256 h;
  h.update("secagg.mock.keygen");
  h.update_u64(seed).update_u32(t).update_u32(m);
  Digest d = h.finish();
  out.pk.mock_tag.assign(d.begin(), d.begin() + 16);
  uint64_t fp = out.pk.fingerprint();
  out.shares.reserve(m);
  for (uint32_t i = 1; i <= m; ++i) {
    SecretShare s;
    s.index = i;
    s.backend = Backend::Mock;
    s.mock_tag = out.pk.mock_tag;
    s.key_fingerprint = fp;
    out.shares.push_back(std::move(s));
  }
  return out;
}

Ciphertext MockBackend::encrypt(const PublicKey& pk, uint64_t value, uint64_t seed) {
  Rng rng(derive_seed(seed, "mock.enc"));
  return make(pk, value, rng.next());
}

Ciphertext MockBackend::add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  uint64_t value = (mock_value(a) + mock_value(b)) % kSpace;
  Sha256 h;
  h.update("secagg.mock.add");
  h.update_u64(mock_nonce(a)).update_u64(mock_nonce(b));
  return make(pk, value, digest_to_u64(h.finish()));
}

Ciphertext MockBackend::scale(const PublicKey& pk, const Ciphertext& c, uint64_t factor) {
  // Multiply in Z_2^63 (factor reduced into the space first).
  uint64_t value =
      static_cast<uint64_t>((static_cast<unsigned __int128>(mock_value(c)) *
                             (factor % kSpace)) %
                            kSpace);
  Sha256 h;
  h.update("secagg.mock.scale");
  h.update_u64(mock_nonce(c)).update_u64(factor);
  return make(pk, value, digest_to_u64(h.finish()));
}

MembershipProof MockBackend::prove_membership(const PublicKey& pk, const Ciphertext& c,
                                              const ValueDomain& domain) {
  Digest d = membership_marker(pk, c, domain);
  return {Bytes(d.begin(), d.end())};
}

bool MockBackend::verify_membership(const PublicKey& pk, const Ciphertext& c,
                                    const ValueDomain& domain,
                                    const MembershipProof& proof) {
  Digest d = membership_marker(pk, c, domain);
  if (proof.transcript.size() != d.size()) return false;
  if (!std::equal(d.begin(), d.end(), proof.transcript.begin())) return false;
  return domain.contains(mock_value(c));
}

DecryptionShare MockBackend::share_decrypt(const PublicKey& pk, const SecretShare& share,
                                           const Ciphertext& c) {
  uint64_t value = mock_value(c);
  DecryptionShare ds;
  ds.index = share.index;
  put_u64(ds.payload, value);
  Digest d = share_marker(pk, share.index, c, value);
  ds.proof.transcript.assign(d.begin(), d.end());
  return ds;
}

bool MockBackend::verify_share(const PublicKey& pk, const Ciphertext& c,
                               const DecryptionShare& ds) {
  ByteReader r(ds.payload);
  uint64_t claimed = r.u64();
  r.expect_done();
  if (claimed != mock_value(c)) return false;
  Digest d = share_marker(pk, ds.index, c, claimed);
  return ds.proof.transcript.size() == d.size() &&
         std::equal(d.begin(), d.end(), ds.proof.transcript.begin());
}

uint64_t MockBackend::combine_valid(const PublicKey&, const Ciphertext& c,
                                    const std::vector<const DecryptionShare*>&) {
  return mock_value(c);
}

uint64_t MockBackend::open(const Ciphertext& c) { return mock_value(c); }

}  // namespace secagg::crypto
