#include "hyperlat/base.hpp"

#include <algorithm>
#include <cmath>

namespace hyperlat {

std::string to_decimal(u128 value) {
  if (value == 0) return "0";
  std::string out;
  while (value != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

u128 parse_u128(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer literal");
  u128 value = 0;
  for (char ch : text) {
    if (ch < '0' || ch > '9') throw std::invalid_argument("invalid digit in integer literal");
    value = checked_add(checked_mul(value, 10), static_cast<u128>(ch - '0'));
  }
  return value;
}

u128 binomial(u64 n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = static_cast<unsigned>(n - k);
  u128 result = 1;
  for (unsigned i = 1; i <= k; ++i) {
    // result * (n - k + i) is divisible by i at every step.
    result = checked_mul(result, n - k + i) / i;
  }
  return result;
}

u64 isqrt(u64 n) {
  if (n == 0) return 0;
  u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r > n / r) --r;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r;
}

Rational Rational::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    u128 n = parse_u128(text.substr(0, slash));
    u128 d = parse_u128(text.substr(slash + 1));
    if (n > std::numeric_limits<u64>::max() || d > std::numeric_limits<u64>::max()) {
      throw std::invalid_argument("rational literal exceeds 64-bit range");
    }
    return Rational(static_cast<u64>(n), static_cast<u64>(d));
  }
  auto dot = text.find('.');
  if (dot == std::string_view::npos) {
    u128 n = parse_u128(text);
    if (n > std::numeric_limits<u64>::max()) {
      throw std::invalid_argument("integer literal exceeds 64-bit range");
    }
    return Rational(static_cast<u64>(n), 1);
  }
  std::string digits(text.substr(0, dot));
  std::string_view frac = text.substr(dot + 1);
  if (frac.size() > 18) throw std::invalid_argument("too many fractional digits for exact parse");
  digits.append(frac);
  u128 n = digits.empty() ? 0 : parse_u128(digits);
  u128 d = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) d *= 10;
  if (n > std::numeric_limits<u64>::max()) {
    throw std::invalid_argument("decimal literal exceeds exact 64-bit range");
  }
  return Rational(static_cast<u64>(n), static_cast<u64>(d));
}

std::string Rational::str() const {
  if (den == 1) return to_decimal(num);
  return to_decimal(num) + "/" + to_decimal(den);
}

U256 mul_128(u128 a, u128 b) {
  const u128 mask = (static_cast<u128>(1) << 64) - 1;
  u128 a_lo = a & mask, a_hi = a >> 64;
  u128 b_lo = b & mask, b_hi = b >> 64;

  u128 ll = a_lo * b_lo;
  u128 lh = a_lo * b_hi;
  u128 hl = a_hi * b_lo;
  u128 hh = a_hi * b_hi;

  u128 mid = (ll >> 64) + (lh & mask) + (hl & mask);
  U256 out;
  out.lo = (ll & mask) | (mid << 64);
  out.hi = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
  return out;
}

int cmp(const U256& a, const U256& b) {
  if (a.hi != b.hi) return a.hi < b.hi ? -1 : 1;
  if (a.lo != b.lo) return a.lo < b.lo ? -1 : 1;
  return 0;
}

namespace {

// a^deg as a 256-bit value; deg <= 4 keeps everything in range for u64 bases.
U256 pow_256(u128 base, unsigned deg) {
  U256 acc{0, 1};
  for (unsigned i = 0; i < deg; ++i) {
    if (acc.hi != 0) throw std::overflow_error("256-bit power overflow");
    acc = mul_128(acc.lo, base);
  }
  return acc;
}

}  // namespace

u64 floor_scaled_root(const Rational& x, u64 n, unsigned deg, unsigned dim) {
  if (deg == 0 || dim == 0) throw std::invalid_argument("floor_scaled_root needs positive exponents");
  if (x.num == 0 || n == 0) return 0;

  // rhs = x.num^deg * n^dim
  U256 rhs = pow_256(x.num, deg);
  for (unsigned i = 0; i < dim; ++i) {
    if (rhs.hi != 0) throw std::overflow_error("floor_scaled_root operand overflow");
    rhs = mul_128(rhs.lo, n);
  }

  auto fits = [&](u128 b) {
    u128 scaled;
    if (__builtin_mul_overflow(b, static_cast<u128>(x.den), &scaled)) return false;
    U256 lhs{0, 1};
    for (unsigned i = 0; i < deg; ++i) {
      if (lhs.hi != 0) return false;
      lhs = mul_128(lhs.lo, scaled);
    }
    return cmp(lhs, rhs) <= 0;
  };

  double guess = x.to_double() * std::pow(static_cast<double>(n),
                                          static_cast<double>(dim) / static_cast<double>(deg));
  u128 b = guess > 1.0 ? static_cast<u128>(guess) : 1;
  while (b > 0 && !fits(b)) b /= 2;
  if (b == 0) {
    if (!fits(1)) return 0;
    b = 1;
  }
  u128 step = 1;
  while (fits(b + step)) {
    b += step;
    step *= 2;
  }
  while (step > 0) {
    if (fits(b + step)) b += step;
    step /= 2;
  }
  if (b > std::numeric_limits<u64>::max()) throw std::overflow_error("floor_scaled_root result overflow");
  return static_cast<u64>(b);
}

}  // namespace hyperlat
