#pragma once

#include "hyperlat/base.hpp"

namespace hyperlat {

// splitmix64 (Steele/Lea/Flood fixed-increment variant, Vigna's constants).
// Streams derived via derive_stream are statistically independent; the
// algorithm identifier recorded in reports and sample metadata is "splitmix64".
inline constexpr const char* kRngAlgorithm = "splitmix64";

class SplitMix64 {
 public:
  explicit SplitMix64(u64 seed) : state_(seed) {}

  u64 next() {
    u64 z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Exact uniform draw on [0, bound), bound >= 1; rejection keeps it unbiased.
  u64 below(u64 bound) {
    if (bound == 0) throw std::invalid_argument("below(0)");
    if (bound == 1) return 0;
    const u64 limit = bound * (std::numeric_limits<u64>::max() / bound);
    u64 x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  u128 below128(u128 bound) {
    if (bound == 0) throw std::invalid_argument("below128(0)");
    if (bound <= std::numeric_limits<u64>::max()) return below(static_cast<u64>(bound));
    const u128 limit = bound * (kU128Max / bound);
    u128 x;
    do {
      x = (static_cast<u128>(next()) << 64) | next();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  u64 state_;
};

inline SplitMix64 derive_stream(u64 seed, u64 stream) {
  SplitMix64 mixer(seed ^ (stream * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL));
  u64 a = mixer.next();
  u64 b = mixer.next();
  return SplitMix64(a ^ (b << 1));
}

}  // namespace hyperlat
