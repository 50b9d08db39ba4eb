#pragma once

#include <gmpxx.h>

#include "secagg/common.hpp"
#include "secagg/rng.hpp"

namespace secagg {

using Int = mpz_class;

namespace bigint {

Bytes to_bytes(const Int& v);           // big-endian magnitude, empty for zero
Int from_bytes(std::span<const uint8_t> b);

Int pow_mod(const Int& base, const Int& exp, const Int& mod);
Int inv_mod(const Int& v, const Int& mod);  // throws std::domain_error if none

/// Uniform integer with exactly `bits` bits (top bit set). Consumes whole
/// 64-bit words from the rng so the draw sequence is easy to reproduce.
Int random_exact_bits(Rng& rng, unsigned bits);

/// Uniform in [0, bound) by rejection over bitlen(bound) bits.
Int random_below(Rng& rng, const Int& bound);

/// Deterministic Miller-Rabin: the twelve fixed small-prime bases (exact below
/// 3.3e24) plus `extra` rounds with bases drawn from the rng for larger sizes.
bool is_probable_prime(const Int& n, Rng& rng, int extra = 8);

/// Safe prime p = 2q+1 with p of exactly `bits` bits.
Int random_safe_prime(Rng& rng, unsigned bits);

}  // namespace bigint
}  // namespace secagg
