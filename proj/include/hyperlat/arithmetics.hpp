#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hyperlat/base.hpp"

namespace hyperlat::arith {

// (prime, exponent) pairs with strictly increasing primes; the product of
// p^exponent reconstructs the integer exactly.
using FactorizationMap = std::vector<std::pair<u64, u32>>;

u64 gcd_vec(std::span<const u64> values);
u128 gcd_vec128(std::span<const u128> values);

// Exact LCM; accumulates as lcm(a,b) = a/gcd(a,b)*b with per-step overflow
// checks, widening to 128 bits on demand.
u128 lcm_vec(std::span<const u64> values);

std::vector<u64> sieve_primes(u64 limit);
bool is_prime(u64 m);

// Exponent of prime p in m.
u32 valuation(u64 p, u64 m);

// Trial division against the shared sieve; supports m <= 10^12.
FactorizationMap factorize(u64 m);
u64 recompose(const FactorizationMap& factors);

}  // namespace hyperlat::arith
