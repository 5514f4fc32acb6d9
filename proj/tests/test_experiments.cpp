#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hyperlat/arithmetics.hpp"
#include "hyperlat/experiments.hpp"

using namespace hyperlat;
using namespace hyperlat::experiments;
using counting::RegionSpec;

namespace {

// brute-force hyperbolic sum over the literal box walk
double brute_hypersum(const RegionSpec& region, const ArithmeticFunction& f, GcdLcm mode) {
  double total = 0.0;
  std::vector<u64> coords(static_cast<std::size_t>(region.dim), 1);
  auto poly = [&](const std::vector<u64>& v) {
    std::vector<u128> e(static_cast<std::size_t>(region.degree) + 1, 0);
    e[0] = 1;
    for (u64 x : v) {
      for (int j = region.degree; j >= 1; --j) e[j] += e[j - 1] * x;
    }
    return e[static_cast<std::size_t>(region.degree)];
  };
  auto walk = [&](auto&& self, int depth) -> void {
    if (depth == region.dim) {
      if (poly(coords) <= region.threshold) {
        const u128 v = mode == GcdLcm::gcd ? static_cast<u128>(arith::gcd_vec(coords))
                                           : arith::lcm_vec(coords);
        total += f.eval(v);
      }
      return;
    }
    for (u64 x = 1; x <= region.threshold; ++x) {
      coords[static_cast<std::size_t>(depth)] = x;
      self(self, depth + 1);
    }
    coords[static_cast<std::size_t>(depth)] = 1;
  };
  walk(walk, 0);
  return total;
}

}  // namespace

TEST_CASE("hypersum examples") {
  // indicator of gcd 1 over the 8 points of the (2,2,4) region: all but (2,2)
  auto r = hypersum({2, 2, 4}, ArithmeticFunction::indicator_of_one(), GcdLcm::gcd);
  CHECK(r.region_size == 8);
  CHECK(r.has_exact_sum);
  CHECK(r.exact_sum == 7);

  auto single = hypersum({2, 2, 1}, ArithmeticFunction::identity(), GcdLcm::lcm);
  CHECK(single.region_size == 1);
  CHECK(single.exact_sum == 1);
}

TEST_CASE("hypersum agrees with the brute-force walk") {
  for (auto region : {RegionSpec{2, 2, 20}, RegionSpec{1, 2, 12}, RegionSpec{2, 3, 15}}) {
    for (auto mode : {GcdLcm::gcd, GcdLcm::lcm}) {
      for (auto f : {ArithmeticFunction::identity(), ArithmeticFunction::indicator_of_one(),
                     ArithmeticFunction::logarithm()}) {
        CAPTURE(region.degree);
        CAPTURE(region.dim);
        CAPTURE(f.name());
        const auto got = hypersum(region, f, mode);
        CHECK(got.sum == doctest::Approx(brute_hypersum(region, f, mode)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("expectation identity: sum equals |H| times the average, bitwise for integer f") {
  const RegionSpec region{2, 2, 300};
  const auto r = hypersum(region, ArithmeticFunction::indicator_of_one(), GcdLcm::gcd);
  const double avg = r.mean();
  CHECK(r.sum == avg * static_cast<double>(r.region_size));
}

TEST_CASE("sampled hypersum is unbiased across seeds") {
  const RegionSpec region{2, 2, 50};
  const ArithmeticFunction f = ArithmeticFunction::identity();
  const auto exact = hypersum(region, f, GcdLcm::lcm);
  double mean_of_estimates = 0.0;
  double combined_var = 0.0;
  const int seeds = 50;
  const u64 draws = 4000;
  for (int s = 0; s < seeds; ++s) {
    const auto est = hypersum_sampled(region, f, GcdLcm::lcm, draws, 9000 + static_cast<u64>(s));
    mean_of_estimates += est.sum;
    combined_var += est.std_error * est.std_error;
  }
  mean_of_estimates /= seeds;
  const double se_of_mean = std::sqrt(combined_var) / seeds;
  CHECK(std::fabs(mean_of_estimates - exact.sum) <= 4.0 * se_of_mean);
}

TEST_CASE("reports serialize deterministically") {
  const auto report =
      gcd_limit_gate({2, 2, 2000}, ArithmeticFunction::indicator_of_one(), 0, 0, 0.2);
  const auto a = to_json(report).dump(2);
  const auto b = to_json(gcd_limit_gate({2, 2, 2000}, ArithmeticFunction::indicator_of_one(), 0, 0,
                                        0.2))
                     .dump(2);
  CHECK(a == b);
  const auto row = to_csv_row(report);
  CHECK(row == to_csv_row(report));
  CHECK(csv_header() == "experiment,l,r,n,m,target,empirical,stat,tol,verdict");
  CHECK(row.find("gcd-limit") == 0);
}

TEST_CASE("gcd_limit_gate exact and sampled paths") {
  // exact path: the (2,2) region at n = 30000 sits about 0.066 above 1/zeta(2)
  auto exact = gcd_limit_gate({2, 2, 30'000}, ArithmeticFunction::indicator_of_one(), 0, 0, 0.12);
  CHECK(exact.stat_kind == "abs_err");
  CHECK(exact.target == doctest::Approx(0.6079271).epsilon(1e-6));
  CHECK(exact.empirical > exact.target);
  CHECK(exact.pass);

  auto sampled = gcd_limit_gate({2, 3, 50'000}, ArithmeticFunction::indicator_of_one(), 40'000,
                                123, 6.0);
  CHECK(sampled.stat_kind == "z");
  CHECK(sampled.target == doctest::Approx(1.0 / 1.2020569).epsilon(1e-6));
  CHECK(sampled.pass);
}

TEST_CASE("lcm_moment_gate on a product region") {
  auto report = lcm_moment_gate({2, 2, 100'000}, 1.0, 0, 0, 0.15);
  CHECK(report.target == doctest::Approx(0.5 * 0.7307629).epsilon(1e-4));
  // measured exact value at n = 1e5 is about 0.4064, 11.2% above the limit
  CHECK(report.empirical == doctest::Approx(0.406404).epsilon(1e-4));
  CHECK(report.pass);
}

TEST_CASE("product_ks_gate on uniform and closed-form references") {
  auto uni = product_ks_gate({2, 2, 100'000}, 20'000, 42, 0.06);
  CHECK(uni.stat_kind == "ks");
  CHECK(uni.stat < 0.06);
  CHECK(uni.pass);

  auto u12 = product_ks_gate({1, 2, 2000}, 20'000, 43, 0.03);
  CHECK(u12.pass);

  // lattice-approximated reference for (2,3)
  auto mid = product_ks_gate({2, 3, 3000}, 5000, 44, 0.08, 30'000);
  CHECK(mid.pass);
}

TEST_CASE("logcoord_ks_gate matches the spacing marginal loosely at small n") {
  // the value-1 atom of the first coordinate dominates the distance at this n
  auto report = logcoord_ks_gate(2, 100'000, 20'000, 45, 0.12);
  CHECK(report.stat < 0.12);
  CHECK(report.pass);
  CHECK(report.details.find("cum_ks_k1") != std::string::npos);
  auto r3 = logcoord_ks_gate(3, 100'000, 20'000, 46, 0.25, true, 0.25);
  CHECK(r3.pass);
}

TEST_CASE("valuation_gate against the divisibility density") {
  std::vector<u64> primes{2};
  std::vector<std::vector<u32>> exponents{{1}, {1}, {1}};
  auto report = valuation_gate({2, 3, 200'000}, primes, exponents, 0.05);
  CHECK(report.target == doctest::Approx(1.0 / 8.0));
  CHECK(report.pass);

  std::vector<u64> primes2{2, 3};
  std::vector<std::vector<u32>> exponents2{{1, 1}, {0, 0}, {2, 0}};
  auto mixed = valuation_gate({2, 3, 200'000}, primes2, exponents2, 0.10);
  CHECK(mixed.target == doctest::Approx(1.0 / (6.0 * 1.0 * 4.0)));
  CHECK(mixed.pass);

  CHECK_THROWS_AS(valuation_gate({2, 3, 100}, std::vector<u64>{4},
                                 std::vector<std::vector<u32>>{{1}, {1}, {1}}, 0.1),
                  std::domain_error);
}

TEST_CASE("joint_cdf_gate against a closed-form box probability") {
  // degree 1, dim 2: limit P{V1 <= a1 sqrt-free n, V2 <= a2 n} = 2 * area of the
  // triangle-box intersection; for alpha = (1/4, 1/2) that is 2 * (1/4)(1/2) = 1/4.
  std::vector<Rational> alphas{Rational(1, 4), Rational(1, 2)};
  auto report = joint_cdf_gate({1, 2, 2000}, alphas, 40'000, 0.02);
  CHECK(report.empirical == doctest::Approx(0.25).epsilon(0.02));
  CHECK(report.target == doctest::Approx(0.25).epsilon(0.005));
  CHECK(report.pass);
}

TEST_CASE("arithmetic function parsing and table domain errors") {
  CHECK(ArithmeticFunction::parse("identity").kind == ArithmeticFunction::Kind::identity);
  CHECK(ArithmeticFunction::parse("pow:0.5").beta == doctest::Approx(0.5));
  CHECK(ArithmeticFunction::parse("log").name() == "log");
  CHECK_THROWS_AS(ArithmeticFunction::parse("nope"), std::invalid_argument);
  auto table = ArithmeticFunction::from_table({{1, 2.5}, {2, 0.5}});
  CHECK(table.eval(1) == 2.5);
  CHECK_THROWS_AS(table.eval(3), std::domain_error);
  CHECK_THROWS_AS(hypersum({2, 2, 9}, table, GcdLcm::lcm), std::domain_error);
}
