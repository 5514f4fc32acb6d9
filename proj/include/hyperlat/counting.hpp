#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hyperlat/base.hpp"
#include "hyperlat/sympoly.hpp"

namespace hyperlat::counting {

inline constexpr int kMaxDim = 12;

// The region {(i_1,...,i_dim) in N^dim : e_degree(i) <= threshold}.
struct RegionSpec {
  int degree = 1;
  int dim = 1;
  u64 threshold = 0;

  void validate() const;
  u128 min_threshold() const;  // C(dim, degree)
  bool nonempty() const;
};

// Positive rational per-coordinate scale factors t_k.
struct ScaleVector {
  std::vector<Rational> t;
};

// Exact bound on the coordinate product: prod i_k <= cap. The caller supplies
// the bound pre-multiplied (already on the product scale), so no irrational
// thresholds ever appear.
struct ProductCap {
  Rational cap{0, 1};
  u128 floor() const;  // largest integer <= cap
};

using CountValue = u128;

struct CountOptions {
  u64 node_budget = 1'000'000'000;
  int threads = 1;
  // Counts weakly decreasing representatives weighted by orbit size instead of
  // walking every point. Valid only for symmetric constraints (plain count and
  // product caps); a measured optimization, never the default.
  bool orbit_mode = false;
};

CountValue count(const RegionSpec& region, const CountOptions& opts = {});
CountValue count_scaled(const RegionSpec& region, const ScaleVector& t, const CountOptions& opts = {});
CountValue count_with_divisibility(const RegionSpec& region, std::span<const u64> mu,
                                   const CountOptions& opts = {});
CountValue count_constrained(const RegionSpec& region, const ProductCap& cap,
                             const CountOptions& opts = {});
// Restricts coordinate k to [1, box[k]] on top of the region constraint.
CountValue count_boxed(const RegionSpec& region, std::span<const u64> box,
                       const CountOptions& opts = {});
// Combined scaling and product cap, used by the valuation experiments:
// e_degree(mu_1 i_1, ..., mu_dim i_dim) <= threshold and prod(mu_k i_k) <= cap.
CountValue count_scaled_constrained(const RegionSpec& region, std::span<const u64> mu,
                                    const ProductCap& cap, const CountOptions& opts = {});

// Number of suffix completions given already-fixed prefix coefficients.
// cap_remainder, when present, bounds the product of the remaining coordinates.
CountValue count_completions(const sympoly::PrefixCoefficients& prefix, int remaining_dims,
                             u64 threshold, std::optional<u128> cap_remainder = std::nullopt,
                             const CountOptions& opts = {});

// Leading-order growth of the count: threshold^dim/dim! for degree 1,
// threshold*log^{dim-1}(threshold)/(dim-1)! for degree == dim, and
// volume*threshold^{dim/degree} in between (volume estimate required there).
double asymptotic_count(int degree, int dim, double threshold,
                        std::optional<double> volume = std::nullopt);

// Exact enumeration of every lattice point of the region (with optional
// multipliers/cap/box as in the counting variants). Coordinates passed to the
// callback are the raw i_k. Points arrive in lexicographic order.
struct EnumSpec {
  RegionSpec region;
  std::vector<u64> mult;      // empty = all ones
  std::optional<u128> cap;    // bound on prod(mult_k * i_k)
  std::vector<u64> box;       // empty = unbounded
};
void for_each_point(const EnumSpec& spec, const std::function<void(std::span<const u64>)>& fn,
                    const CountOptions& opts = {});
void for_each_point(const RegionSpec& region, const std::function<void(std::span<const u64>)>& fn,
                    const CountOptions& opts = {});

// Per-value counts over the first coordinate: result[v-1] = number of points
// with i_1 = v. Used by the exact sampler to build its CDF table.
std::vector<u128> first_coord_counts(const RegionSpec& region, const CountOptions& opts = {});

// Divisor-style recursion W_k(m) = sum_i W_{k-1}(floor(m/i)) evaluated over the
// quotient set {floor(n/i)}, grouped by distinct quotients and memoized; the
// fast path behind count() for degree == dim and behind the product sampler.
class QuotientTable {
 public:
  QuotientTable(int levels, u64 n);
  u64 n() const { return n_; }
  int levels() const { return levels_; }
  // W_level(value); value must lie in the quotient set of n (or be <= sqrt(n)).
  u128 value(int level, u64 v) const;

 private:
  int levels_;
  u64 n_, sq_, large_count_;
  std::vector<std::vector<u128>> w_;
};

// Literal ungrouped recursion, kept as an independent comparator for the fast path.
u128 divisor_power_sum_plain(int levels, u64 n);

// One record per line: key<TAB>decimal-count. Writes replace the whole file
// atomically; concurrent readers see either the old or the new snapshot.
class CountCache {
 public:
  explicit CountCache(std::filesystem::path directory);
  std::optional<u128> lookup(const std::string& key) const;
  void store(const std::string& key, u128 value);

  static std::string key_plain(const RegionSpec& region);
  static std::string key_scaled(const RegionSpec& region, const ScaleVector& t);
  static std::string key_divisibility(const RegionSpec& region, std::span<const u64> mu);
  static std::string key_constrained(const RegionSpec& region, u128 cap_floor);

 private:
  std::filesystem::path file_;
  std::map<std::string, std::string> entries_;
};

}  // namespace hyperlat::counting
