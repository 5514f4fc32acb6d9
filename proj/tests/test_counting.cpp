#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "hyperlat/counting.hpp"
#include "hyperlat/rng.hpp"

using namespace hyperlat;
using namespace hyperlat::counting;

namespace {

// Independent brute-force oracle: literal walk of the box [1, n]^dim with the
// constraint value computed by subset enumeration.
u128 subset_poly(int degree, const std::vector<u64>& coords) {
  const std::size_t n = coords.size();
  std::vector<int> pick(n, 0);
  std::fill(pick.end() - degree, pick.end(), 1);
  u128 total = 0;
  do {
    u128 prod = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick[i]) prod *= coords[i];
    }
    total += prod;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return total;
}

struct BoxOracle {
  std::vector<Rational> scale;  // empty = ones
  std::optional<u128> cap;      // bound on prod(scale_k * i_k)
  std::vector<u64> box;

  // Exhaustive walk with monotone early exit: once the all-ones completion of
  // a prefix violates a constraint, larger values only get worse.
  u128 run(int degree, int dim, u64 n) const {
    std::vector<u64> coords(static_cast<std::size_t>(dim), 1);
    u128 total = 0;
    walk(degree, dim, n, 0, coords, total);
    return total;
  }

  bool ok_with_ones(int degree, int dim, u64 n, const std::vector<u64>& coords, int fixed) const {
    u64 den = 1;
    for (const auto& t : scale) den = std::lcm(den, t.den);
    std::vector<u64> scaled(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
      const u64 raw = k < fixed ? coords[static_cast<std::size_t>(k)] : 1;
      if (scale.empty()) {
        scaled[static_cast<std::size_t>(k)] = raw;
      } else {
        const auto& t = scale[static_cast<std::size_t>(k)];
        scaled[static_cast<std::size_t>(k)] = raw * t.num * (den / t.den);
      }
      if (!box.empty() && k < fixed && raw > box[static_cast<std::size_t>(k)]) return false;
    }
    u128 rhs = n;
    for (int i = 0; i < degree; ++i) rhs *= den;
    if (subset_poly(degree, scaled) > rhs) return false;
    if (cap) {
      u128 prod = 1;
      for (u64 s : scaled) prod *= s;
      u128 den_pow = 1;
      for (int i = 0; i < dim; ++i) den_pow *= den;
      if (prod > *cap * den_pow) return false;
    }
    return true;
  }

  void walk(int degree, int dim, u64 n, int depth, std::vector<u64>& coords, u128& total) const {
    if (depth == dim) {
      ++total;
      return;
    }
    for (u64 v = 1;; ++v) {
      coords[static_cast<std::size_t>(depth)] = v;
      if (!ok_with_ones(degree, dim, n, coords, depth + 1)) break;
      walk(degree, dim, n, depth + 1, coords, total);
    }
  }
};

u128 oracle_count(int degree, int dim, u64 n) { return BoxOracle{}.run(degree, dim, n); }

}  // namespace

TEST_CASE("count examples") {
  CHECK(count({1, 3, 10}) == 120);  // C(10, 3)
  CHECK(count({2, 2, 4}) == 8);     // 4 + 2 + 1 + 1
  CHECK(count({2, 3, 3}) == 1);
  CHECK(count({2, 3, 5}) == 4);
}

TEST_CASE("count equals naive box enumeration for small parameters") {
  for (int dim = 1; dim <= 4; ++dim) {
    for (int degree = 1; degree <= dim; ++degree) {
      for (u64 n : {0ULL, 1ULL, 2ULL, 3ULL, 5ULL, 9ULL, 17ULL, 24ULL}) {
        CAPTURE(degree);
        CAPTURE(dim);
        CAPTURE(n);
        CHECK(count({degree, dim, n}) == oracle_count(degree, dim, n));
      }
    }
  }
}

TEST_CASE("binomial identity for degree 1") {
  for (int dim = 1; dim <= 6; ++dim) {
    for (u64 n = 0; n <= 60; ++n) {
      CHECK(count({1, dim, n}) == binomial(n, static_cast<unsigned>(dim)));
    }
  }
}

TEST_CASE("divisor-sum identity for degree == dim == 2") {
  for (u64 n : {1ULL, 2ULL, 10ULL, 100ULL, 999ULL, 10000ULL}) {
    u128 direct = 0;
    for (u64 i = 1; i <= n; ++i) direct += n / i;
    CHECK(count({2, 2, n}) == direct);
  }
}

TEST_CASE("fast divisor recursion equals plain recursion") {
  for (int dim = 1; dim <= 3; ++dim) {
    for (u64 n : {1ULL, 7ULL, 63ULL, 500ULL, 2048ULL}) {
      QuotientTable table(dim, n);
      CHECK(table.value(dim, n) == divisor_power_sum_plain(dim, n));
    }
  }
}

TEST_CASE("count is monotone in the threshold") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + static_cast<int>(rng.below(3));
    const int degree = 1 + static_cast<int>(rng.below(static_cast<u64>(dim)));
    const u64 n = rng.below(150);
    CHECK(count({degree, dim, n}) <= count({degree, dim, n + 1}));
  }
}

TEST_CASE("count_scaled examples") {
  CHECK(count_scaled({2, 2, 4}, {{Rational(2, 1), Rational(1, 1)}}) == 3);
  CHECK(count_scaled({1, 2, 6}, {{Rational(1, 1), Rational(1, 1)}}) == 15);
  CHECK(count_scaled({2, 2, 4}, {{Rational(5, 1), Rational(5, 1)}}) == 0);
}

TEST_CASE("count_scaled with rational scales matches the box oracle") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 2 + static_cast<int>(rng.below(2));
    const int degree = 1 + static_cast<int>(rng.below(static_cast<u64>(dim)));
    const u64 n = 1 + rng.below(40);
    ScaleVector t;
    BoxOracle oracle;
    for (int k = 0; k < dim; ++k) {
      Rational r(1 + rng.below(4), 1 + rng.below(4));
      t.t.push_back(r);
      oracle.scale.push_back(r);
    }
    CAPTURE(degree);
    CAPTURE(dim);
    CAPTURE(n);
    CHECK(count_scaled({degree, dim, n}, t) == oracle.run(degree, dim, n));
  }
}

TEST_CASE("count_with_divisibility examples and substitution identity") {
  CHECK(count_with_divisibility({2, 2, 4}, std::vector<u64>{2, 1}) == 3);
  CHECK(count_with_divisibility({2, 2, 4}, std::vector<u64>{1, 1}) == 8);
  CHECK(count_with_divisibility({1, 2, 6}, std::vector<u64>{2, 2}) == 3);

  SplitMix64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = 2 + static_cast<int>(rng.below(3));
    const int degree = 1 + static_cast<int>(rng.below(static_cast<u64>(dim)));
    const u64 n = 1 + rng.below(120);
    std::vector<u64> mu(static_cast<std::size_t>(dim));
    ScaleVector t;
    for (auto& m : mu) {
      m = 1 + rng.below(5);
      t.t.push_back(Rational(m, 1));
    }
    CHECK(count_with_divisibility({degree, dim, n}, mu) == count_scaled({degree, dim, n}, t));
  }
}

TEST_CASE("count_constrained examples") {
  CHECK(count_constrained({2, 2, 4}, {Rational(2, 1)}) == 3);
  CHECK(count_constrained({2, 2, 4}, {Rational(4, 1)}) == 8);
  CHECK(count_constrained({2, 3, 5}, {Rational(1, 1)}) == 1);
}

TEST_CASE("count_constrained matches the box oracle and is monotone in the cap") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + static_cast<int>(rng.below(3));
    const int degree = 1 + static_cast<int>(rng.below(static_cast<u64>(dim)));
    const u64 n = 1 + rng.below(40);
    const u64 cap = 1 + rng.below(100);
    BoxOracle oracle;
    oracle.cap = cap;
    CAPTURE(degree);
    CAPTURE(dim);
    CAPTURE(n);
    CAPTURE(cap);
    CHECK(count_constrained({degree, dim, n}, {Rational(cap, 1)}) == oracle.run(degree, dim, n));
    CHECK(count_constrained({degree, dim, n}, {Rational(cap, 1)}) <=
          count_constrained({degree, dim, n}, {Rational(cap + 3, 1)}));
  }
}

TEST_CASE("count_boxed matches the box oracle") {
  SplitMix64 rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = 2 + static_cast<int>(rng.below(2));
    const int degree = 1 + static_cast<int>(rng.below(static_cast<u64>(dim)));
    const u64 n = 1 + rng.below(40);
    BoxOracle oracle;
    std::vector<u64> box(static_cast<std::size_t>(dim));
    for (auto& b : box) b = 1 + rng.below(n + 4);
    oracle.box = box;
    CHECK(count_boxed({degree, dim, n}, box) == oracle.run(degree, dim, n));
  }
}

TEST_CASE("count_completions examples") {
  using sympoly::PrefixCoefficients;
  CHECK(count_completions(PrefixCoefficients::start(2), 2, 4) == 8);
  auto prefix2 = PrefixCoefficients::start(2);
  prefix2.extend(2);
  CHECK(count_completions(prefix2, 1, 4) == 2);
  auto prefix4 = PrefixCoefficients::start(2);
  prefix4.extend(4);
  CHECK(count_completions(prefix4, 1, 4) == 1);
}

TEST_CASE("count_completions consistency with full counts") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + static_cast<int>(rng.below(3));
    const int degree = 1 + static_cast<int>(rng.below(static_cast<u64>(dim)));
    const u64 n = 1 + rng.below(80);
    // Sum of completions over the first coordinate equals the full count.
    auto prefix = sympoly::PrefixCoefficients::start(degree);
    u128 total = 0;
    for (u64 v = 1;; ++v) {
      auto extended = prefix;
      extended.extend(v);
      const u128 completions = count_completions(extended, dim - 1, n);
      if (completions == 0) break;
      total += completions;
    }
    CHECK(total == count({degree, dim, n}));
  }
}

TEST_CASE("orbit mode equals plain counting") {
  SplitMix64 rng(37);
  CountOptions orbit;
  orbit.orbit_mode = true;
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 1 + static_cast<int>(rng.below(4));
    const int degree = 1 + static_cast<int>(rng.below(static_cast<u64>(dim)));
    const u64 n = rng.below(100);
    CAPTURE(degree);
    CAPTURE(dim);
    CAPTURE(n);
    CHECK(count({degree, dim, n}, orbit) == count({degree, dim, n}));
    const u64 cap = 1 + rng.below(200);
    CHECK(count_constrained({degree, dim, n}, {Rational(cap, 1)}, orbit) ==
          count_constrained({degree, dim, n}, {Rational(cap, 1)}));
  }
}

TEST_CASE("threaded counting is identical to sequential") {
  CountOptions threaded;
  threaded.threads = 4;
  for (u64 n : {50ULL, 200ULL, 1000ULL}) {
    CHECK(count({2, 3, n}, threaded) == count({2, 3, n}));
    CHECK(count({3, 4, n}, threaded) == count({3, 4, n}));
  }
}

TEST_CASE("node budget raises budget_exceeded") {
  CountOptions tight;
  tight.node_budget = 10;
  CHECK_THROWS_AS(count({2, 3, 100000}, tight), budget_exceeded);
}

TEST_CASE("overflow in counting raises overflow_error") {
  CHECK_THROWS_AS(count({1, 6, 100'000'000}), std::overflow_error);
}

TEST_CASE("enumeration respects membership, support bound and inclusion bound") {
  // Every point satisfies e_degree <= n, the product-support inequality
  // (prod i)^degree <= n^dim, and for degree < dim the e_{dim-1} inclusion
  // bound e_{dim-1}(i)^degree <= dim^degree * n^(dim-1).
  for (auto [degree, dim, n] : std::vector<std::tuple<int, int, u64>>{
           {2, 3, 200}, {2, 4, 60}, {3, 4, 80}, {1, 2, 100}, {2, 2, 500}}) {
    u128 points = 0;
    const u128 support_rhs = checked_pow(n, static_cast<unsigned>(dim));
    const u128 inclusion_rhs =
        checked_mul(checked_pow(static_cast<u128>(dim), static_cast<unsigned>(degree)),
                    checked_pow(n, static_cast<unsigned>(dim - 1)));
    for_each_point(RegionSpec{degree, dim, static_cast<u64>(n)}, [&](std::span<const u64> coords) {
      ++points;
      std::vector<u64> v(coords.begin(), coords.end());
      CHECK(subset_poly(degree, v) <= n);
      u128 prod = 1;
      for (u64 c : v) prod *= c;
      CHECK(checked_pow(prod, static_cast<unsigned>(degree)) <= support_rhs);
      if (degree < dim) {
        const u128 high = subset_poly(dim - 1, v);
        CHECK(checked_pow(high, static_cast<unsigned>(degree)) <= inclusion_rhs);
      }
    });
    CHECK(points == count(RegionSpec{degree, dim, static_cast<u64>(n)}));
  }
}

TEST_CASE("first_coord_counts sums to the total and matches completions") {
  RegionSpec region{2, 3, 300};
  auto per_value = first_coord_counts(region);
  u128 total = 0;
  for (std::size_t i = 0; i < per_value.size(); ++i) {
    auto prefix = sympoly::PrefixCoefficients::start(2);
    prefix.extend(static_cast<u64>(i + 1));
    CHECK(per_value[i] == count_completions(prefix, 2, region.threshold));
    total += per_value[i];
  }
  CHECK(total == count(region));
}

TEST_CASE("asymptotic_count formulas") {
  CHECK(counting::asymptotic_count(1, 3, 100.0) == doctest::Approx(1e6 / 6.0));
  const double e = std::exp(1.0);
  CHECK(counting::asymptotic_count(2, 2, e) == doctest::Approx(e));
  CHECK(counting::asymptotic_count(2, 3, 1000.0, 1.5) == doctest::Approx(1.5 * std::pow(1000.0, 1.5)));
  CHECK_THROWS_AS(counting::asymptotic_count(2, 3, 1000.0), std::invalid_argument);
}

TEST_CASE("cache round-trips exactly") {
  auto dir = std::filesystem::temp_directory_path() / "hyperlat_cache_test";
  std::filesystem::remove_all(dir);
  RegionSpec region{2, 3, 1000};
  const u128 value = count(region);
  {
    CountCache cache(dir);
    CHECK(!cache.lookup(CountCache::key_plain(region)));
    cache.store(CountCache::key_plain(region), value);
  }
  {
    CountCache cache(dir);
    auto hit = cache.lookup(CountCache::key_plain(region));
    REQUIRE(hit.has_value());
    CHECK(*hit == value);
  }
  CHECK(CountCache::key_plain(region) == "v1:count:2:3:1000");
  std::filesystem::remove_all(dir);
}

TEST_CASE("scaled counts respect the volume upper bound") {
  // count_scaled(region, t) * prod(t) <= V * n^{dim/degree} with V the frozen
  // lattice estimate for (2,3) plus headroom for its own downward bias.
  const double v_hat = 2.082129189625;  // count(2,3,4e6)/ (4e6)^{3/2}
  const double delta = 0.02;
  SplitMix64 rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    ScaleVector t;
    double prod_t = 1.0;
    for (int k = 0; k < 3; ++k) {
      Rational r(1 + rng.below(3), 1 + rng.below(3));
      t.t.push_back(r);
      prod_t *= r.to_double();
    }
    const u64 n = 50'000 + rng.below(50'000);
    const double lhs = static_cast<double>(count_scaled({2, 3, n}, t)) * prod_t;
    const double rhs = v_hat * std::pow(static_cast<double>(n), 1.5) * (1.0 + delta);
    CAPTURE(n);
    CHECK(lhs <= rhs);
  }
}

TEST_CASE("count_completions with a product cap matches count_constrained") {
  for (u64 cap : {1ULL, 5ULL, 40ULL, 1000ULL}) {
    const RegionSpec region{2, 3, 60};
    const u128 expected = count_constrained(region, {Rational(cap, 1)});
    const u128 got = count_completions(sympoly::PrefixCoefficients::start(2), 3, 60,
                                       static_cast<u128>(cap));
    CHECK(got == expected);
  }
}

TEST_CASE("combined scaling and product cap matches the box oracle") {
  SplitMix64 rng(83);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 2 + static_cast<int>(rng.below(2));
    const int degree = 1 + static_cast<int>(rng.below(static_cast<u64>(dim)));
    const u64 n = 1 + rng.below(60);
    const u64 cap = 1 + rng.below(300);
    std::vector<u64> mu(static_cast<std::size_t>(dim));
    BoxOracle oracle;
    for (auto& m : mu) {
      m = 1 + rng.below(3);
      oracle.scale.push_back(Rational(m, 1));
    }
    oracle.cap = cap;
    CAPTURE(degree);
    CAPTURE(dim);
    CAPTURE(n);
    CHECK(count_scaled_constrained({degree, dim, n}, mu, {Rational(cap, 1)}) ==
          oracle.run(degree, dim, n));
  }
}
