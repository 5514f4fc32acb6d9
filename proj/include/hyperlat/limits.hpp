#pragma once

#include <span>

#include "hyperlat/counting.hpp"
#include "hyperlat/rng.hpp"

namespace hyperlat::limits {

// Truncation parameters for prime-product limit computations. Every truncated
// result carries a rigorous error bound alongside the value.
struct LimitModel {
  u64 prime_cutoff = 100'000;
  u32 exponent_cap = 40;
  double tolerance = 1e-6;
};

// Riemann zeta for real s > 1, within absolute error eps. Direct series with
// an Euler-Maclaurin tail (integral term K^{1-s}/(s-1) plus midpoint
// correction); the remainder is bounded by s*K^{-s-1}/12.
double zeta(double s, double eps = 1e-10);

// P{limit GCD of dim uniform integers = m} = m^{-dim}/zeta(dim).
double gcd_limit_pmf(int dim, u64 m);
// Mellin transform of the limit GCD law: zeta(dim - s)/zeta(dim), s < dim - 1.
double gcd_limit_mellin(int dim, double s);

struct MomentEstimate {
  double value = 0.0;
  double error_bound = 0.0;
};

// beta-th moment of the limit of LCM/(V_1...V_dim): the prime product of
// p^(max_k G_k - sum_k G_k) over independent geometric G_k(p). Evaluated as a
// truncated product over primes <= prime_cutoff with enumerated exponent
// vectors; error_bound dominates both truncations.
MomentEstimate lcm_ratio_moment(int dim, double beta, const LimitModel& model = {});

struct LcmRatioDraw {
  double value = 1.0;        // always 1/denominator
  u128 denominator = 1;
};
LcmRatioDraw sample_lcm_ratio_limit(int dim, const LimitModel& model, SplitMix64& stream);

struct VolumeEstimate {
  int degree = 1;
  int dim = 1;
  double value = 0.0;
  bool lower_bound = false;   // counting-based estimates are Riemann-sum lower bounds
  u64 approx_threshold = 0;
};

// Volume of {y >= 0 : e_degree(y) <= 1}. Exact 1/dim! for degree == 1;
// rejected for degree == dim (infinite); otherwise the lattice lower bound
// count(degree, dim, n)/n^{dim/degree}.
VolumeEstimate volume(int degree, int dim, u64 approx_threshold = 0,
                      const counting::CountOptions& opts = {});

// CDF of the limit law of prod(V_k)/n^{dim/degree}. degree == dim: exact x.
// degree < dim: lattice approximation count_constrained/count at the given
// threshold, with the product cap computed by exact integer root arithmetic.
double u_cdf(int degree, int dim, const Rational& x, u64 approx_threshold,
             const counting::CountOptions& opts = {});

// Closed forms for (degree, dim) = (1, 2), supported on [0, 1/4].
double u12_cdf(double x);
double u12_density(double x);

// Supremum of the support of the product limit: C(dim, degree)^(-dim/degree).
double x_star(int degree, int dim);

// Marginal CDF of each spacing J_k of dim-1 uniforms: 1 - (1-x)^(dim-1).
double spacing_marginal_cdf(int dim, double x);
// Joint density of (J_1, ..., J_{dim-1}): constant (dim-1)! on the open simplex.
double spacing_joint_density(int dim, std::span<const double> point);
// CDF of Z^(k) = J_1 + ... + J_k (k-th order statistic of dim-1 uniforms), k < dim.
double spacing_prefix_cdf(int dim, int k, double x);

}  // namespace hyperlat::limits
