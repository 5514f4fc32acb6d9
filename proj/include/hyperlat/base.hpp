#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hyperlat {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline constexpr u128 kU128Max = ~static_cast<u128>(0);

// Thrown when an exact computation would exceed the DFS node budget.
class budget_exceeded : public std::runtime_error {
 public:
  explicit budget_exceeded(const std::string& what) : std::runtime_error(what) {}
};

inline u128 checked_add(u128 a, u128 b) {
  u128 s;
  if (__builtin_add_overflow(a, b, &s)) {
    throw std::overflow_error("128-bit addition overflow");
  }
  return s;
}

inline u128 checked_mul(u128 a, u128 b) {
  u128 p;
  if (__builtin_mul_overflow(a, b, &p)) {
    throw std::overflow_error("128-bit multiplication overflow");
  }
  return p;
}

inline std::optional<u128> try_mul(u128 a, u128 b) {
  u128 p;
  if (__builtin_mul_overflow(a, b, &p)) return std::nullopt;
  return p;
}

inline u128 checked_pow(u128 base, unsigned exp) {
  u128 result = 1;
  for (unsigned i = 0; i < exp; ++i) result = checked_mul(result, base);
  return result;
}

std::string to_decimal(u128 value);
u128 parse_u128(std::string_view text);

// C(n, k), exact, overflow-checked.
u128 binomial(u64 n, unsigned k);

u64 isqrt(u64 n);

// Positive rational with exact u64 numerator/denominator, kept reduced.
struct Rational {
  u64 num = 0;
  u64 den = 1;

  Rational() = default;
  Rational(u64 n, u64 d) : num(n), den(d) { reduce(); }

  void reduce() {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (num == 0) {
      den = 1;
      return;
    }
    u64 g = std::gcd(num, den);
    num /= g;
    den /= g;
  }

  bool positive() const { return num > 0; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  // Accepts "3", "3/4" and decimal literals like "0.125" (parsed exactly).
  static Rational parse(std::string_view text);
  std::string str() const;
};

// 256-bit helpers used for exact comparisons whose intermediates exceed 128 bits.
struct U256 {
  u128 hi = 0;
  u128 lo = 0;
};

U256 mul_128(u128 a, u128 b);
int cmp(const U256& a, const U256& b);

// Largest B >= 0 with (B*q)^deg <= p^deg * n^dim; exact integer arithmetic.
// This is floor((p/q) * n^{dim/deg}) without going through floating point.
u64 floor_scaled_root(const Rational& x, u64 n, unsigned deg, unsigned dim);

}  // namespace hyperlat
