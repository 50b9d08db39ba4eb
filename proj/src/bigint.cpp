#include "secagg/bigint.hpp"

namespace secagg::bigint {

Bytes to_bytes(const Int& v) {
  if (v < 0) throw std::invalid_argument("negative bigint");
  size_t count = 0;
  Bytes out((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
  if (v == 0) return {};
  mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(count);
  return out;
}

Int from_bytes(std::span<const uint8_t> b) {
  Int v;
  if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  return v;
}

Int pow_mod(const Int& base, const Int& exp, const Int& mod) {
  Int r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return r;
}

Int inv_mod(const Int& v, const Int& mod) {
  Int r;
  if (mpz_invert(r.get_mpz_t(), v.get_mpz_t(), mod.get_mpz_t()) == 0)
    throw std::domain_error("not invertible");
  return r;
}

Int random_exact_bits(Rng& rng, unsigned bits) {
  if (bits == 0) return 0;
  unsigned words = (bits + 63) / 64;
  Int v = 0;
  for (unsigned i = 0; i < words; ++i) {
    v <<= 64;
    v += Int(rng.next());
  }
  // Trim to width, then force the top bit.
  Int mask = (Int(1) << bits) - 1;
  v &= mask;
  v |= Int(1) << (bits - 1);
  return v;
}

Int random_below(Rng& rng, const Int& bound) {
  if (bound <= 0) throw std::invalid_argument("bound must be positive");
  unsigned bits = static_cast<unsigned>(mpz_sizeinbase(bound.get_mpz_t(), 2));
  unsigned words = (bits + 63) / 64;
  Int mask = (Int(1) << bits) - 1;
  while (true) {
    Int v = 0;
    for (unsigned i = 0; i < words; ++i) {
      v <<= 64;
      v += Int(rng.next());
    }
    v &= mask;
    if (v < bound) return v;
  }
}

namespace {

bool miller_rabin_round(const Int& n, const Int& d, unsigned r, const Int& a) {
  Int x = pow_mod(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (unsigned i = 1; i < r; ++i) {
    x = x * x % n;
    if (x == n - 1) return true;
  }
  return false;
}

}  // namespace

bool is_probable_prime(const Int& n, Rng& rng, int extra) {
  static const unsigned long kBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (n < 2) return false;
  for (unsigned long b : kBases) {
    if (n == b) return true;
    if (n % b == 0) return false;
  }
  Int d = n - 1;
  unsigned r = 0;
  while (mpz_even_p(d.get_mpz_t())) {
    d >>= 1;
    ++r;
  }
  for (unsigned long b : kBases)
    if (!miller_rabin_round(n, d, r, Int(b))) return false;
  // Fixed bases are exact up to ~3.3e24; beyond that add seeded rounds.
  if (mpz_sizeinbase(n.get_mpz_t(), 2) > 81) {
    for (int i = 0; i < extra; ++i) {
      Int a = 2 + random_below(rng, n - 3);
      if (!miller_rabin_round(n, d, r, a)) return false;
    }
  }
  return true;
}

Int random_safe_prime(Rng& rng, unsigned bits) {
  if (bits < 4) throw std::invalid_argument("safe prime needs >= 4 bits");
  while (true) {
    Int q = random_exact_bits(rng, bits - 1);
    q |= 1;
    if (!is_probable_prime(q, rng)) continue;
    Int p = 2 * q + 1;
    if (mpz_sizeinbase(p.get_mpz_t(), 2) != bits) continue;
    if (is_probable_prime(p, rng)) return p;
  }
}

}  // namespace secagg::bigint
