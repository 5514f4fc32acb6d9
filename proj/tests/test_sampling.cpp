#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>

#include "hyperlat/sampling.hpp"
#include "hyperlat/stats.hpp"

using namespace hyperlat;
using namespace hyperlat::sampling;
using counting::RegionSpec;

namespace {

u128 poly_value(int degree, const std::vector<u64>& coords) {
  // direct evaluation via the recurrence, independent of the sampler path
  std::vector<u128> e(static_cast<std::size_t>(degree) + 1, 0);
  e[0] = 1;
  for (u64 x : coords) {
    for (int j = degree; j >= 1; --j) e[j] += e[j - 1] * x;
  }
  return e[static_cast<std::size_t>(degree)];
}

std::map<std::vector<u64>, u64> draw_histogram(const SamplerConfig& config, u64 draws) {
  Sampler sampler(config);
  SplitMix64 stream = derive_stream(config.seed, 17);
  std::map<std::vector<u64>, u64> hist;
  for (u64 i = 0; i < draws; ++i) ++hist[sampler.sample(stream).coords];
  return hist;
}

void check_exact_uniform(const RegionSpec& region, u64 draws, u64 seed) {
  // chi-square of draws against the exact uniform law on the whole region
  std::vector<std::vector<u64>> points;
  counting::for_each_point(region, [&](std::span<const u64> c) {
    points.emplace_back(c.begin(), c.end());
  });
  std::map<std::vector<u64>, std::size_t> index;
  for (std::size_t i = 0; i < points.size(); ++i) index[points[i]] = i;

  SamplerConfig config{region, seed, Method::conditional_count};
  Sampler sampler(config);
  REQUIRE(sampler.region_size() == points.size());
  SplitMix64 stream = derive_stream(seed, 17);
  std::vector<u64> observed(points.size(), 0);
  for (u64 i = 0; i < draws; ++i) {
    const auto point = sampler.sample(stream);
    auto it = index.find(point.coords);
    REQUIRE(it != index.end());  // membership
    ++observed[it->second];
  }
  std::vector<double> expected(points.size(),
                               static_cast<double>(draws) / static_cast<double>(points.size()));
  const auto result = stats::chi_square(observed, expected);
  CAPTURE(region.degree);
  CAPTURE(region.dim);
  CAPTURE(region.threshold);
  CHECK(result.p_value > 1e-3);
}

}  // namespace

TEST_CASE("singleton region always yields the all-ones point") {
  SamplerConfig config{RegionSpec{2, 2, 1}, 4, Method::conditional_count};
  Sampler sampler(config);
  SplitMix64 stream = derive_stream(4, 17);
  for (int i = 0; i < 20; ++i) {
    CHECK(sampler.sample(stream).coords == std::vector<u64>{1, 1});
  }
}

TEST_CASE("every draw is a member of its region") {
  SplitMix64 seed_rng(3);
  for (auto region : {RegionSpec{2, 2, 500}, RegionSpec{1, 3, 40}, RegionSpec{2, 3, 300},
                      RegionSpec{3, 3, 200}, RegionSpec{2, 4, 60}, RegionSpec{3, 4, 80},
                      RegionSpec{1, 1, 9}}) {
    SamplerConfig config{region, seed_rng.next(), Method::conditional_count};
    Sampler sampler(config);
    SplitMix64 stream = derive_stream(config.seed, 17);
    for (int i = 0; i < 2000; ++i) {
      const auto point = sampler.sample(stream);
      REQUIRE(point.coords.size() == static_cast<std::size_t>(region.dim));
      CHECK(poly_value(region.degree, point.coords) <= region.threshold);
    }
  }
}

TEST_CASE("exact-marginal agreement: chi-square against uniform point probabilities") {
  check_exact_uniform(RegionSpec{2, 2, 30}, 400'000, 1001);   // product region
  check_exact_uniform(RegionSpec{1, 2, 20}, 300'000, 1002);   // simplex
  check_exact_uniform(RegionSpec{2, 3, 12}, 300'000, 1003);   // general path
  check_exact_uniform(RegionSpec{3, 3, 20}, 300'000, 1004);   // deeper product region
  check_exact_uniform(RegionSpec{2, 4, 10}, 300'000, 1005);   // middle-coordinate walk
}

TEST_CASE("stated marginal example: P(V1 = 1) = 4/8 for the (2,2,4) region") {
  SamplerConfig config{RegionSpec{2, 2, 4}, 99, Method::conditional_count};
  auto hist = draw_histogram(config, 200'000);
  u64 first_is_one = 0;
  for (const auto& [coords, cnt] : hist) {
    if (coords[0] == 1) first_is_one += cnt;
  }
  const double p = static_cast<double>(first_is_one) / 200'000.0;
  CHECK(p == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("first-coordinate marginals match exact conditional counts at scale") {
  const RegionSpec region{2, 2, 1000};
  SamplerConfig config{region, 2024, Method::conditional_count};
  Sampler sampler(config);
  const u128 total = sampler.region_size();
  SplitMix64 stream = derive_stream(config.seed, 17);
  const u64 draws = 200'000;
  std::vector<u64> observed(region.threshold, 0);
  for (u64 i = 0; i < draws; ++i) ++observed[sampler.sample(stream).coords[0] - 1];
  std::vector<double> expected(region.threshold);
  for (u64 v = 1; v <= region.threshold; ++v) {
    expected[v - 1] = static_cast<double>(draws) *
                      (static_cast<double>(region.threshold / v) / static_cast<double>(total));
  }
  CHECK(stats::chi_square(observed, expected).p_value > 1e-3);
}

TEST_CASE("method equivalence for degree 1 regions") {
  const RegionSpec region{1, 3, 14};  // C(14,3) = 364 points
  const u64 draws = 150'000;
  auto cond = draw_histogram({region, 5001, Method::conditional_count}, draws);
  auto rej = draw_histogram({region, 5002, Method::rejection}, draws);
  std::vector<std::vector<u64>> points;
  counting::for_each_point(region, [&](std::span<const u64> c) {
    points.emplace_back(c.begin(), c.end());
  });
  std::vector<u64> a, b;
  for (const auto& p : points) {
    a.push_back(cond.count(p) ? cond.at(p) : 0);
    b.push_back(rej.count(p) ? rej.at(p) : 0);
  }
  CHECK(stats::chi_square_two_sample(a, b).p_value > 1e-3);
}

TEST_CASE("rejection is rejected outside degree 1") {
  CHECK_THROWS_AS(Sampler({RegionSpec{2, 2, 10}, 0, Method::rejection}), std::invalid_argument);
}

TEST_CASE("empty region is rejected") {
  CHECK_THROWS_AS(Sampler({RegionSpec{2, 3, 2}, 0, Method::conditional_count}),
                  std::invalid_argument);
}

TEST_CASE("exchangeability: V1 and V2 marginals agree") {
  const RegionSpec region{2, 3, 20'000};
  SamplerConfig config{region, 777, Method::conditional_count};
  Sampler sampler(config);
  SplitMix64 stream = derive_stream(config.seed, 17);
  // log-scale bins keep every cell populated
  auto bin_of = [](u64 v) {
    int b = 0;
    while (v > 1) {
      v >>= 1;
      ++b;
    }
    return std::min(b, 13);
  };
  std::vector<u64> first(14, 0), second(14, 0);
  for (int i = 0; i < 100'000; ++i) {
    const auto point = sampler.sample(stream);
    ++first[static_cast<std::size_t>(bin_of(point.coords[0]))];
    ++second[static_cast<std::size_t>(bin_of(point.coords[1]))];
  }
  CHECK(stats::chi_square_two_sample(first, second).p_value > 1e-3);
}

TEST_CASE("sample_batch is deterministic in (seed, region, m, method)") {
  const SamplerConfig config{RegionSpec{2, 2, 1000}, 31337, Method::conditional_count};
  auto a = sample_batch(config, 500);
  auto b = sample_batch(config, 500);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].coords == b[i].coords);
  auto c = sample_batch({RegionSpec{2, 2, 1000}, 31338, Method::conditional_count}, 500);
  bool all_equal = true;
  for (std::size_t i = 0; i < a.size(); ++i) all_equal = all_equal && a[i].coords == c[i].coords;
  CHECK(!all_equal);
  CHECK(sample_batch(config, 0).empty());
}

TEST_CASE("log_coords") {
  CHECK(log_coords({{1, 1}}, 10) == std::vector<double>{0.0, 0.0});
  CHECK(log_coords({{10, 1}}, 10) == std::vector<double>{1.0, 0.0});
  auto lc = log_coords({{32, 8}}, 1024);
  CHECK(lc[0] == doctest::Approx(0.5));
  CHECK(lc[1] == doctest::Approx(0.3));
}

TEST_CASE("csv dump round-trips coordinates exactly") {
  const auto dir = std::filesystem::temp_directory_path() / "hyperlat_sampling_test";
  std::filesystem::create_directories(dir);
  const SamplerConfig config{RegionSpec{2, 3, 5000}, 11, Method::conditional_count};
  auto points = sample_batch(config, 200);
  const auto csv = dir / "points.csv";
  dump_csv(points, csv);
  write_metadata(config, points.size(), dir / "points.meta.json");
  auto reread = read_csv(csv);
  REQUIRE(reread.size() == points.size());
  for (std::size_t i = 0; i < points.size(); ++i) CHECK(reread[i].coords == points[i].coords);
  std::filesystem::remove_all(dir);
}

TEST_CASE("sampler construction honors the node budget") {
  counting::CountOptions tight;
  tight.node_budget = 10;
  CHECK_THROWS_AS(Sampler({RegionSpec{2, 3, 100'000}, 0, Method::conditional_count}, tight),
                  budget_exceeded);
}
