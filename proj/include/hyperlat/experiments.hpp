#pragma once

#include <map>
#include <memory>

#include <json.hpp>

#include "hyperlat/counting.hpp"
#include "hyperlat/limits.hpp"
#include "hyperlat/sampling.hpp"
#include "hyperlat/stats.hpp"

namespace hyperlat::experiments {

struct ArithmeticFunction {
  enum class Kind { identity, power, log, indicator_of_one, table };

  Kind kind = Kind::identity;
  double beta = 1.0;  // regular-variation index (power kind)
  std::shared_ptr<const std::map<u128, double>> values;

  double eval(u128 m) const;
  bool integer_valued() const;  // exact 128-bit accumulation possible
  u128 eval_exact(u128 m) const;
  std::string name() const;

  static ArithmeticFunction identity();
  static ArithmeticFunction power(double beta);
  static ArithmeticFunction logarithm();
  static ArithmeticFunction indicator_of_one();
  static ArithmeticFunction from_table(std::map<u128, double> table);
  // "identity" | "log" | "ind1" | "pow:<beta>" | "table:<path>" (lines "m value")
  static ArithmeticFunction parse(std::string_view text);
};

enum class GcdLcm { gcd, lcm };

struct HypersumResult {
  bool exact = true;
  double sum = 0.0;  // exact sum, or the unbiased estimate |H| * mean(f)
  bool has_exact_sum = false;
  u128 exact_sum = 0;  // integer-valued f on the exact path
  u128 region_size = 0;
  double std_error = 0.0;  // of `sum`, sampled path only
  u64 draws = 0;
  u64 seed = 0;

  double mean() const { return sum / static_cast<double>(region_size); }
};

HypersumResult hypersum(const counting::RegionSpec& region, const ArithmeticFunction& f, GcdLcm mode,
                        const counting::CountOptions& opts = {});
HypersumResult hypersum_sampled(const counting::RegionSpec& region, const ArithmeticFunction& f,
                                GcdLcm mode, u64 draws, u64 seed,
                                const counting::CountOptions& opts = {});

// Structured record of one experiment. pass iff stat <= tolerance; a pure
// function of inputs and seed.
struct ExperimentReport {
  std::string id;
  int degree = 0;
  int dim = 0;
  u64 threshold = 0;
  u64 draws = 0;  // 0 = exact
  u64 seed = 0;
  double target = 0.0;
  std::string target_provenance;
  double empirical = 0.0;
  std::string stat_kind;  // "abs_err" | "rel_err" | "z" | "ks" | "chisq"
  double stat = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string details;
};

std::string format_double(double v);  // shortest round-trip representation
nlohmann::ordered_json to_json(const ExperimentReport& report);
std::string csv_header();
std::string to_csv_row(const ExperimentReport& report);

// E f(GCD) against sum_m f(m) * gcd_limit_pmf; exact enumeration when draws == 0
// (stat abs_err), otherwise sampled (stat z against the standard error).
ExperimentReport gcd_limit_gate(const counting::RegionSpec& region, const ArithmeticFunction& f,
                                u64 draws, u64 seed, double tolerance,
                                const counting::CountOptions& opts = {});

// Sampled E[(LCM/n^{dim/degree})^beta] against E[U^beta] * lcm_ratio_moment.
// draws == 0 uses exact enumeration. Stat rel_err.
ExperimentReport lcm_moment_gate(const counting::RegionSpec& region, double beta, u64 draws,
                                 u64 seed, double tolerance, const limits::LimitModel& model = {},
                                 const counting::CountOptions& opts = {});

// KS distance of prod(V_k)/n^{dim/degree} draws against the product limit CDF.
// ref_threshold feeds the lattice-approximated CDF when no closed form applies.
ExperimentReport product_ks_gate(const counting::RegionSpec& region, u64 draws, u64 seed,
                                 double tolerance, u64 ref_threshold = 0,
                                 const counting::CountOptions& opts = {});

// KS distance of log V_1/log n draws from the degree == dim region against the
// spacing marginal; optionally also gates the cumulative-product marginals
// log(V_1...V_k)/log n against their order-statistic CDFs.
ExperimentReport logcoord_ks_gate(int dim, u64 threshold, u64 draws, u64 seed, double tolerance,
                                  bool check_cumulative = true,
                                  double cumulative_tolerance = 0.0,  // 0 = same as tolerance
                                  const counting::CountOptions& opts = {});

// Exact ratio count_with_divisibility/count against prod 1/mu_k, where
// mu_k = prod_t primes[t]^exponents[k][t]. Stat rel_err.
ExperimentReport valuation_gate(const counting::RegionSpec& region, std::span<const u64> primes,
                                const std::vector<std::vector<u32>>& exponents, double tolerance,
                                const counting::CountOptions& opts = {});

// Exact P{V_k <= alpha_k n^{1/degree} for all k} against the same box ratio at
// a larger reference threshold (the lattice approximation of the limit).
ExperimentReport joint_cdf_gate(const counting::RegionSpec& region, std::span<const Rational> alphas,
                                u64 ref_threshold, double tolerance,
                                const counting::CountOptions& opts = {});

using stats::chi_square;
using stats::ks_statistic;

}  // namespace hyperlat::experiments
