#include "src/crypto/backends.hpp"

namespace secagg::crypto {

namespace {

Int coprime_below(Rng& rng, const Int& n) {
  while (true) {
    Int r = bigint::random_below(rng, n);
    if (r == 0) continue;
    Int g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
    if (g == 1) return r;
  }
}

Int hash_to_int(const Digest& d) {
  Int v;
  mpz_import(v.get_mpz_t(), d.size(), 1, 1, 1, 0, d.data());
  return v;
}

void update_int(Sha256& h, const Int& v) {
  Bytes b = bigint::to_bytes(v);
  h.update_u32(static_cast<uint32_t>(b.size()));
  h.update(b);
}

Digest share_challenge(const PublicKey& pk, uint32_t index, const Int& a, const Int& b,
                       const Int& c4, const Int& ci2) {
  Sha256 h;
  h.update("secagg.paillier.share");
  h.update_u64(pk.fingerprint());
  h.update_u32(index);
  update_int(h, a);
  update_int(h, b);
  update_int(h, c4);
  update_int(h, ci2);
  return h.finish();
}

Int membership_challenge(const PublicKey& pk, const ValueDomain& domain,
                         const Ciphertext& c, const std::vector<Int>& commitments,
                         unsigned k_bits) {
  Sha256 h;
  h.update("secagg.paillier.membership");
  h.update_u64(pk.fingerprint());
  h.update(domain.to_bytes());
  h.update_u32(static_cast<uint32_t>(c.bytes().size()));
  h.update(c.bytes());
  for (const Int& a : commitments) update_int(h, a);
  Int e = hash_to_int(h.finish());
  return e & ((Int(1) << k_bits) - 1);
}

// c * (n+1)^{-value} mod n^2: the statement "this is an n-th power" holds
// exactly when c encrypts value.
Int residue_statement(const PublicKey& pk, const Int& c, uint64_t value) {
  Int gv = bigint::pow_mod(pk.generator, Int(value), pk.n_squared);
  return c * bigint::inv_mod(gv, pk.n_squared) % pk.n_squared;
}

}  // namespace

unsigned PaillierBackend::challenge_bits(const SecurityParams& p) {
  return std::min(128u, p.modulus_bits / 2 - 2);
}

Int PaillierBackend::ct_value(const PublicKey& pk, const Ciphertext& c) {
  return bigint::from_bytes(c.bytes()) % pk.n_squared;
}

Ciphertext PaillierBackend::make(const PublicKey& pk, const Int& value) {
  Ciphertext c;
  c.backend_ = Backend::Real;
  c.bytes_ = bigint::to_bytes(value % pk.n_squared);
  return c;
}

KeygenResult PaillierBackend::keygen(const SecurityParams& params, uint32_t t,
                                     uint32_t m, uint64_t seed) {
  Rng rng(derive_seed(seed, "paillier.keygen"));
  unsigned half = params.modulus_bits / 2;

  Int p, q, n;
  do {
    p = bigint::random_safe_prime(rng, half);
    do {
      q = bigint::random_safe_prime(rng, half);
    } while (q == p);
    n = p * q;
  } while (mpz_sizeinbase(n.get_mpz_t(), 2) != params.modulus_bits);

  Int p1 = (p - 1) / 2, q1 = (q - 1) / 2;
  Int secret_mod = p1 * q1;
  Int n_squared = n * n;

  // d = 0 mod p'q', d = 1 mod n.
  Int d = secret_mod * bigint::inv_mod(secret_mod % n, n);

  // Shamir polynomial over Z_{n p'q'} with constant term d.
  Int poly_mod = n * secret_mod;
  std::vector<Int> coeff;
  coeff.push_back(d);
  for (uint32_t i = 1; i < t; ++i) coeff.push_back(bigint::random_below(rng, poly_mod));

  std::vector<Int> share_values;
  share_values.reserve(m);
  for (uint32_t i = 1; i <= m; ++i) {
    Int x(i), acc = 0, xp = 1;
    for (const Int& a : coeff) {
      acc = (acc + a * xp) % poly_mod;
      xp = xp * x % poly_mod;
    }
    share_values.push_back(acc);
  }

  // Verifier base: a random square generates the squares with overwhelming
  // probability for a safe-prime modulus.
  Int r = coprime_below(rng, n_squared);
  Int v = r * r % n_squared;

  Int delta = 1;
  for (uint32_t i = 2; i <= m; ++i) delta *= i;

  KeygenResult out;
  out.pk.backend = Backend::Real;
  out.pk.params = params;
  out.pk.threshold = t;
  out.pk.share_count = m;
  out.pk.n = n;
  out.pk.n_squared = n_squared;
  out.pk.generator = n + 1;
  out.pk.v = v;
  out.pk.delta = delta;
  out.pk.theta = bigint::inv_mod(4 * delta * delta % n, n);
  out.pk.verification_keys.reserve(m);
  for (uint32_t i = 0; i < m; ++i)
    out.pk.verification_keys.push_back(
        bigint::pow_mod(v, delta * share_values[i], n_squared));

  uint64_t fp = out.pk.fingerprint();
  out.shares.reserve(m);
  for (uint32_t i = 1; i <= m; ++i) {
    SecretShare s;
    s.index = i;
    s.backend = Backend::Real;
    s.value = share_values[i - 1];
    s.key_fingerprint = fp;
    out.shares.push_back(std::move(s));
  }
  return out;
}

Ciphertext PaillierBackend::encrypt(const PublicKey& pk, uint64_t value, uint64_t seed) {
  Rng rng(derive_seed(seed, "paillier.enc"));
  Int r = coprime_below(rng, pk.n);
  Int c = bigint::pow_mod(pk.generator, Int(value), pk.n_squared) *
          bigint::pow_mod(r, pk.n, pk.n_squared) % pk.n_squared;
  return make(pk, c);
}

Ciphertext PaillierBackend::add(const PublicKey& pk, const Ciphertext& a,
                                const Ciphertext& b) {
  return make(pk, ct_value(pk, a) * ct_value(pk, b) % pk.n_squared);
}

Ciphertext PaillierBackend::scale(const PublicKey& pk, const Ciphertext& c,
                                  uint64_t factor) {
  return make(pk, bigint::pow_mod(ct_value(pk, c), Int(factor), pk.n_squared));
}

std::pair<Ciphertext, MembershipProof> PaillierBackend::prove_membership(
    const PublicKey& pk, uint64_t value, uint64_t seed, const ValueDomain& domain) {
  if (Int(value) >= pk.n) throw std::out_of_range("plaintext outside the plaintext space");
  Rng rng(derive_seed(seed, "paillier.memb"));
  unsigned k = challenge_bits(pk.params);
  Int k_mask = (Int(1) << k) - 1;

  Int r = coprime_below(rng, pk.n);
  Int cval = bigint::pow_mod(pk.generator, Int(value), pk.n_squared) *
             bigint::pow_mod(r, pk.n, pk.n_squared) % pk.n_squared;
  Ciphertext c = make(pk, cval);

  size_t d = domain.values.size();
  std::optional<size_t> true_branch;
  for (size_t j = 0; j < d; ++j)
    if (domain.values[j] == value) true_branch = j;

  std::vector<Int> e(d), z(d), a(d);
  Int rho;
  for (size_t j = 0; j < d; ++j) {
    Int u = residue_statement(pk, cval, domain.values[j]);
    if (true_branch && j == *true_branch) {
      rho = coprime_below(rng, pk.n);
      a[j] = bigint::pow_mod(rho, pk.n, pk.n_squared);
    } else {
      e[j] = bigint::random_below(rng, Int(1) << k);
      z[j] = coprime_below(rng, pk.n);
      a[j] = bigint::pow_mod(z[j], pk.n, pk.n_squared) *
             bigint::inv_mod(bigint::pow_mod(u, e[j], pk.n_squared), pk.n_squared) %
             pk.n_squared;
    }
  }
  Int challenge = membership_challenge(pk, domain, c, a, k);
  if (true_branch) {
    size_t j = *true_branch;
    Int sum = 0;
    for (size_t i = 0; i < d; ++i)
      if (i != j) sum += e[i];
    e[j] = (challenge - sum) & k_mask;
    if (e[j] < 0) e[j] += Int(1) << k;
    z[j] = rho * bigint::pow_mod(r, e[j], pk.n) % pk.n;
  }

  MembershipProof proof;
  put_u32(proof.transcript, static_cast<uint32_t>(d));
  for (size_t j = 0; j < d; ++j) {
    put_bytes(proof.transcript, bigint::to_bytes(e[j]));
    put_bytes(proof.transcript, bigint::to_bytes(z[j]));
  }
  return {std::move(c), std::move(proof)};
}

bool PaillierBackend::verify_membership(const PublicKey& pk, const Ciphertext& c,
                                        const ValueDomain& domain,
                                        const MembershipProof& proof) {
  unsigned k = challenge_bits(pk.params);
  ByteReader r(proof.transcript);
  uint32_t count = r.u32();
  if (count != domain.values.size()) return false;
  Int cval = ct_value(pk, c);

  std::vector<Int> e(count), a(count);
  Int sum = 0;
  for (uint32_t j = 0; j < count; ++j) {
    e[j] = bigint::from_bytes(r.bytes());
    Int z = bigint::from_bytes(r.bytes());
    if (e[j] >= Int(1) << k) return false;
    sum += e[j];
    Int u = residue_statement(pk, cval, domain.values[j]);
    Int g;
    mpz_gcd(g.get_mpz_t(), u.get_mpz_t(), pk.n_squared.get_mpz_t());
    if (g != 1) return false;
    a[j] = bigint::pow_mod(z, pk.n, pk.n_squared) *
           bigint::inv_mod(bigint::pow_mod(u, e[j], pk.n_squared), pk.n_squared) %
           pk.n_squared;
  }
  r.expect_done();
  Int challenge = membership_challenge(pk, domain, c, a, k);
  return (sum & ((Int(1) << k) - 1)) == challenge;
}

DecryptionShare PaillierBackend::share_decrypt(const PublicKey& pk,
                                               const SecretShare& share,
                                               const Ciphertext& c, uint64_t seed) {
  Rng rng(derive_seed(seed, "paillier.sdec", share.index));
  Int cval = ct_value(pk, c);
  Int ci = bigint::pow_mod(cval, 2 * pk.delta * share.value, pk.n_squared);

  // Equality-of-exponent proof: log_{c^4}(c_i^2) = log_v(v_i) = delta * s_i.
  Int c4 = bigint::pow_mod(cval, Int(4), pk.n_squared);
  Int ci2 = ci * ci % pk.n_squared;
  Int r_bound = Int(1) << (2 * pk.params.modulus_bits + 320);
  Int rr = bigint::random_below(rng, r_bound);
  Int a = bigint::pow_mod(c4, rr, pk.n_squared);
  Int b = bigint::pow_mod(pk.v, rr, pk.n_squared);
  Int e = hash_to_int(share_challenge(pk, share.index, a, b, c4, ci2));
  Int zz = rr + e * share.value * pk.delta;

  DecryptionShare ds;
  ds.index = share.index;
  ds.payload = bigint::to_bytes(ci);
  put_bytes(ds.proof.transcript, bigint::to_bytes(e));
  put_bytes(ds.proof.transcript, bigint::to_bytes(zz));
  return ds;
}

bool PaillierBackend::verify_share(const PublicKey& pk, const Ciphertext& c,
                                   const DecryptionShare& ds) {
  Int ci = bigint::from_bytes(ds.payload) % pk.n_squared;
  ByteReader r(ds.proof.transcript);
  Int e = bigint::from_bytes(r.bytes());
  Int zz = bigint::from_bytes(r.bytes());
  r.expect_done();

  Int cval = ct_value(pk, c);
  Int c4 = bigint::pow_mod(cval, Int(4), pk.n_squared);
  Int ci2 = ci * ci % pk.n_squared;
  Int g;
  mpz_gcd(g.get_mpz_t(), ci2.get_mpz_t(), pk.n_squared.get_mpz_t());
  if (g != 1) return false;
  const Int& vi = pk.verification_keys.at(ds.index - 1);

  Int a = bigint::pow_mod(c4, zz, pk.n_squared) *
          bigint::inv_mod(bigint::pow_mod(ci2, e, pk.n_squared), pk.n_squared) %
          pk.n_squared;
  Int b = bigint::pow_mod(pk.v, zz, pk.n_squared) *
          bigint::inv_mod(bigint::pow_mod(vi, e, pk.n_squared), pk.n_squared) %
          pk.n_squared;
  return hash_to_int(share_challenge(pk, ds.index, a, b, c4, ci2)) == e;
}

uint64_t PaillierBackend::combine_valid(const PublicKey& pk, const Ciphertext& c,
                                        const std::vector<const DecryptionShare*>& valid) {
  (void)c;
  Int acc = 1;
  for (const DecryptionShare* dsi : valid) {
    // Integer Lagrange coefficient at zero, cleared by delta.
    Int num = pk.delta, den = 1;
    for (const DecryptionShare* dsj : valid) {
      if (dsj == dsi) continue;
      num *= -Int(dsj->index);
      den *= Int(dsi->index) - Int(dsj->index);
    }
    if (!mpz_divisible_p(num.get_mpz_t(), den.get_mpz_t()))
      throw std::logic_error("non-integral lagrange coefficient");
    Int lambda;
    mpz_divexact(lambda.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());

    Int ci = bigint::from_bytes(dsi->payload) % pk.n_squared;
    Int exp = 2 * lambda;
    Int base = ci;
    if (exp < 0) {
      base = bigint::inv_mod(ci, pk.n_squared);
      exp = -exp;
    }
    acc = acc * bigint::pow_mod(base, exp, pk.n_squared) % pk.n_squared;
  }
  Int l = acc - 1;
  if (!mpz_divisible_p(l.get_mpz_t(), pk.n.get_mpz_t()))
    throw InsufficientSharesError("combined value is not a valid encryption");
  Int plain = l / pk.n * pk.theta % pk.n;
  if (!plain.fits_ulong_p())
    throw std::out_of_range("plaintext exceeds the 64-bit range");
  return plain.get_ui();
}

}  // namespace secagg::crypto
