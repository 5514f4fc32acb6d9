#include "hyperlat/arithmetics.hpp"

#include <numeric>

namespace hyperlat::arith {

namespace {

constexpr u64 kFactorLimit = 1'000'000'000'000ULL;  // 10^12
constexpr u64 kTrialSieveLimit = 1'000'000;

const std::vector<u64>& trial_primes() {
  static const std::vector<u64> primes = sieve_primes(kTrialSieveLimit);
  return primes;
}

}  // namespace

u64 gcd_vec(std::span<const u64> values) {
  if (values.empty()) throw std::invalid_argument("gcd_vec of empty vector");
  u64 g = 0;
  for (u64 v : values) {
    if (v == 0) throw std::invalid_argument("gcd_vec arguments must be positive");
    g = std::gcd(g, v);
  }
  return g;
}

u128 gcd_vec128(std::span<const u128> values) {
  if (values.empty()) throw std::invalid_argument("gcd_vec of empty vector");
  u128 g = 0;
  for (u128 v : values) {
    if (v == 0) throw std::invalid_argument("gcd_vec arguments must be positive");
    while (v != 0) {
      u128 t = g % v;
      g = v;
      v = t;
    }
  }
  return g;
}

u128 lcm_vec(std::span<const u64> values) {
  if (values.empty()) throw std::invalid_argument("lcm_vec of empty vector");
  u128 l = 1;
  for (u64 v : values) {
    if (v == 0) throw std::invalid_argument("lcm_vec arguments must be positive");
    u128 g = l;
    u128 w = v;
    while (w != 0) {
      u128 t = g % w;
      g = w;
      w = t;
    }
    l = checked_mul(l / g, v);
  }
  return l;
}

std::vector<u64> sieve_primes(u64 limit) {
  if (limit < 2) throw std::invalid_argument("sieve limit must be >= 2");
  std::vector<bool> composite(limit + 1, false);
  std::vector<u64> primes;
  for (u64 i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (u64 j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

bool is_prime(u64 m) {
  if (m < 2) return false;
  for (u64 d = 2; d * d <= m; ++d) {
    if (m % d == 0) return false;
  }
  return true;
}

u32 valuation(u64 p, u64 m) {
  if (m == 0) throw std::invalid_argument("valuation of zero");
  if (!is_prime(p)) throw std::domain_error("valuation base must be prime");
  u32 e = 0;
  while (m % p == 0) {
    m /= p;
    ++e;
  }
  return e;
}

FactorizationMap factorize(u64 m) {
  if (m == 0) throw std::invalid_argument("factorize(0)");
  if (m > kFactorLimit) throw std::domain_error("factorize supports m <= 10^12");
  FactorizationMap factors;
  u64 rest = m;
  for (u64 p : trial_primes()) {
    if (p * p > rest) break;
    if (rest % p != 0) continue;
    u32 e = 0;
    while (rest % p == 0) {
      rest /= p;
      ++e;
    }
    factors.emplace_back(p, e);
  }
  // Any remainder has no factor <= 10^6, so with m <= 10^12 it is prime.
  if (rest > 1) factors.emplace_back(rest, 1);
  return factors;
}

u64 recompose(const FactorizationMap& factors) {
  u128 m = 1;
  for (const auto& [p, e] : factors) {
    for (u32 i = 0; i < e; ++i) m = checked_mul(m, p);
  }
  if (m > std::numeric_limits<u64>::max()) throw std::overflow_error("recompose overflow");
  return static_cast<u64>(m);
}

}  // namespace hyperlat::arith
