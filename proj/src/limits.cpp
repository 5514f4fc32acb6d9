#include "hyperlat/limits.hpp"

#include <algorithm>
#include <cmath>

#include "hyperlat/arithmetics.hpp"

namespace hyperlat::limits {

double zeta(double s, double eps) {
  if (!(s > 1.0)) throw std::invalid_argument("zeta requires s > 1");
  if (!(eps > 0.0)) throw std::invalid_argument("zeta requires eps > 0");
  const double k_real = std::pow(s / (12.0 * eps), 1.0 / (s + 1.0));
  const u64 K = std::max<u64>(16, static_cast<u64>(std::ceil(k_real)));
  double sum = 0.0;
  for (u64 k = K - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s);
  const double kd = static_cast<double>(K);
  return sum + 0.5 * std::pow(kd, -s) + std::pow(kd, 1.0 - s) / (s - 1.0);
}

namespace {

// zeta at small integer arguments, evaluated once at eps = 1e-12.
double zeta_int(int s) {
  static constexpr int kMax = 64;
  static thread_local double cache[kMax + 1] = {};
  if (s < 2 || s > kMax) return zeta(static_cast<double>(s), 1e-12);
  if (cache[s] == 0.0) cache[s] = zeta(static_cast<double>(s), 1e-12);
  return cache[s];
}

}  // namespace

double gcd_limit_pmf(int dim, u64 m) {
  if (dim < 2) throw std::invalid_argument("gcd limit law needs dim >= 2");
  if (m == 0) throw std::invalid_argument("pmf argument must be >= 1");
  return std::pow(static_cast<double>(m), -static_cast<double>(dim)) / zeta_int(dim);
}

double gcd_limit_mellin(int dim, double s) {
  if (dim < 2) throw std::invalid_argument("gcd limit law needs dim >= 2");
  if (!(s < static_cast<double>(dim) - 1.0)) {
    throw std::invalid_argument("Mellin transform defined for s < dim - 1");
  }
  return zeta(static_cast<double>(dim) - s, 1e-12) / zeta_int(dim);
}

namespace {

void validate_model(const LimitModel& model) {
  if (model.prime_cutoff < 2) throw std::invalid_argument("prime cutoff must be >= 2");
  if (model.exponent_cap < 1) throw std::invalid_argument("exponent cap must be >= 1");
  if (!(model.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
}

// E over exponent vectors j in [0, cap]^dim of p^{beta*(max j - sum j)} under
// independent geometric weights (1 - 1/p) p^{-j}.
double prime_factor(u64 p, int dim, double beta, u32 cap) {
  const double q = 1.0 / static_cast<double>(p);
  const double one_minus_q = 1.0 - q;
  std::vector<double> geo(cap + 1);     // (1-q) q^j
  geo[0] = one_minus_q;
  for (u32 j = 1; j <= cap; ++j) geo[j] = geo[j - 1] * q;
  const u32 max_gap = cap * static_cast<u32>(dim - 1);
  std::vector<double> shrink(max_gap + 1);  // p^{-beta*k}
  shrink[0] = 1.0;
  const double step = std::pow(static_cast<double>(p), -beta);
  for (u32 k = 1; k <= max_gap; ++k) shrink[k] = shrink[k - 1] * step;

  double total = 0.0;
  // Odometer over exponent vectors, tracking partial probability, sum and max.
  auto recurse = [&](auto&& self, int k, double prob, u32 sum, u32 mx) -> void {
    if (k == dim) {
      total += prob * shrink[sum - mx];
      return;
    }
    for (u32 v = 0; v <= cap; ++v) {
      self(self, k + 1, prob * geo[v], sum + v, std::max(mx, v));
    }
  };
  recurse(recurse, 0, 1.0, 0, 0);
  return total;
}

}  // namespace

MomentEstimate lcm_ratio_moment(int dim, double beta, const LimitModel& model) {
  if (dim < 2) throw std::invalid_argument("lcm_ratio_moment needs dim >= 2");
  if (!(beta > 0.0)) throw std::invalid_argument("lcm_ratio_moment needs beta > 0");
  validate_model(model);

  const auto primes = arith::sieve_primes(model.prime_cutoff);
  // Per-prime enumeration tail target; the geometric tail decays like p^-J so
  // the cap is rarely reached beyond the first few primes.
  const double tail_goal = model.tolerance / (100.0 * static_cast<double>(primes.size()));

  double value = 1.0;
  double hi = 1.0;
  for (u64 p : primes) {
    u32 cap = 1;
    double tail = static_cast<double>(dim) * std::pow(static_cast<double>(p), -2.0);
    while (cap < model.exponent_cap && tail > tail_goal) {
      ++cap;
      tail /= static_cast<double>(p);
    }
    const double f = prime_factor(p, dim, beta, cap);
    value *= f;
    hi *= std::min(1.0, f + tail);
  }
  // Primes beyond the cutoff each contribute a factor in [1 - C(dim,2)/p^2, 1];
  // sum_{p > P} p^-2 <= 1/P.
  const double pairs = 0.5 * static_cast<double>(dim) * static_cast<double>(dim - 1);
  const double lo = value * std::max(0.0, 1.0 - pairs / static_cast<double>(model.prime_cutoff));

  MomentEstimate out;
  out.value = value;
  out.error_bound = std::max(hi - value, value - lo) + 1e-12;
  return out;
}

LcmRatioDraw sample_lcm_ratio_limit(int dim, const LimitModel& model, SplitMix64& stream) {
  if (dim < 2) throw std::invalid_argument("sample_lcm_ratio_limit needs dim >= 2");
  validate_model(model);
  static thread_local std::vector<u64> prime_cache;
  static thread_local u64 prime_cache_limit = 0;
  if (prime_cache_limit != model.prime_cutoff) {
    prime_cache = arith::sieve_primes(model.prime_cutoff);
    prime_cache_limit = model.prime_cutoff;
  }

  LcmRatioDraw draw;
  for (u64 p : prime_cache) {
    u32 sum = 0, mx = 0;
    for (int k = 0; k < dim; ++k) {
      u32 g = 0;
      while (stream.below(p) == 0) ++g;  // success probability exactly 1/p
      sum += g;
      mx = std::max(mx, g);
    }
    for (u32 e = 0; e < sum - mx; ++e) draw.denominator = checked_mul(draw.denominator, p);
  }
  draw.value = 1.0 / static_cast<double>(draw.denominator);
  return draw;
}

VolumeEstimate volume(int degree, int dim, u64 approx_threshold, const counting::CountOptions& opts) {
  if (dim < 1 || degree < 1 || degree > dim) throw std::invalid_argument("invalid degree/dim");
  if (degree == dim) throw std::invalid_argument("volume is infinite for degree == dim");
  VolumeEstimate out;
  out.degree = degree;
  out.dim = dim;
  if (degree == 1) {
    double factorial = 1.0;
    for (int i = 2; i <= dim; ++i) factorial *= i;
    out.value = 1.0 / factorial;
    out.lower_bound = false;
    return out;
  }
  if (approx_threshold == 0) throw std::invalid_argument("approximation threshold required");
  counting::RegionSpec region{degree, dim, approx_threshold};
  const u128 cnt = counting::count(region, opts);
  out.value = static_cast<double>(cnt) /
              std::pow(static_cast<double>(approx_threshold), static_cast<double>(dim) / degree);
  out.lower_bound = true;
  out.approx_threshold = approx_threshold;
  return out;
}

double u_cdf(int degree, int dim, const Rational& x, u64 approx_threshold,
             const counting::CountOptions& opts) {
  if (dim < 1 || degree < 1 || degree > dim) throw std::invalid_argument("invalid degree/dim");
  if (degree == dim) {
    if (x.num > x.den) throw std::invalid_argument("u_cdf argument above support for degree == dim");
    return x.to_double();
  }
  // Support check: x <= x* iff x.num^degree * C(dim,degree)^dim <= x.den^degree.
  const u128 binom = binomial(static_cast<u64>(dim), static_cast<unsigned>(degree));
  {
    U256 lhs{0, 1}, rhs{0, 1};
    for (int i = 0; i < degree; ++i) {
      if (lhs.hi != 0 || rhs.hi != 0) throw std::overflow_error("u_cdf support check overflow");
      lhs = mul_128(lhs.lo, x.num);
      rhs = mul_128(rhs.lo, x.den);
    }
    for (int i = 0; i < dim; ++i) {
      if (lhs.hi != 0) throw std::overflow_error("u_cdf support check overflow");
      lhs = mul_128(lhs.lo, binom);
    }
    if (cmp(lhs, rhs) > 0) throw std::invalid_argument("u_cdf argument above support endpoint");
  }
  if (degree == 1 && dim == 2 && approx_threshold == 0) return u12_cdf(x.to_double());
  if (approx_threshold == 0) throw std::invalid_argument("approximation threshold required");
  counting::RegionSpec region{degree, dim, approx_threshold};
  const u64 cap = floor_scaled_root(x, approx_threshold, static_cast<unsigned>(degree),
                                    static_cast<unsigned>(dim));
  counting::ProductCap product_cap{Rational(cap, 1)};
  const u128 total = counting::count(region, opts);
  if (total == 0) throw std::invalid_argument("empty region in u_cdf approximation");
  const u128 constrained = counting::count_constrained(region, product_cap, opts);
  return static_cast<double>(constrained) / static_cast<double>(total);
}

double u12_cdf(double x) {
  if (!(x >= 0.0 && x <= 0.25)) throw std::invalid_argument("u12_cdf domain is [0, 1/4]");
  if (x == 0.0) return 0.0;
  const double s = std::sqrt(1.0 - 4.0 * x);
  if (s == 0.0) return 1.0;
  return 1.0 - s + 2.0 * x * std::log((1.0 + s) / (1.0 - s));
}

double u12_density(double x) {
  if (!(x >= 0.0 && x <= 0.25)) throw std::invalid_argument("u12_density domain is [0, 1/4]");
  const double s = std::sqrt(1.0 - 4.0 * x);
  if (s == 0.0) return 0.0;
  return 2.0 * std::log((1.0 + s) / (1.0 - s));
}

double x_star(int degree, int dim) {
  if (dim < 1 || degree < 1 || degree > dim) throw std::invalid_argument("invalid degree/dim");
  const u128 binom = binomial(static_cast<u64>(dim), static_cast<unsigned>(degree));
  return std::pow(static_cast<double>(binom), -static_cast<double>(dim) / degree);
}

double spacing_marginal_cdf(int dim, double x) {
  if (dim < 2) throw std::invalid_argument("spacings need dim >= 2");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("spacing CDF domain is [0, 1]");
  return 1.0 - std::pow(1.0 - x, dim - 1);
}

double spacing_joint_density(int dim, std::span<const double> point) {
  if (dim < 2) throw std::invalid_argument("spacings need dim >= 2");
  if (point.size() != static_cast<std::size_t>(dim - 1)) {
    throw std::invalid_argument("spacing joint density takes dim - 1 coordinates");
  }
  double sum = 0.0;
  for (double v : point) {
    if (!(v > 0.0)) throw std::invalid_argument("point outside the open simplex");
    sum += v;
  }
  if (!(sum < 1.0)) throw std::invalid_argument("point outside the open simplex");
  double factorial = 1.0;
  for (int i = 2; i <= dim - 1; ++i) factorial *= i;
  return factorial;
}

double spacing_prefix_cdf(int dim, int k, double x) {
  if (dim < 2 || k < 1 || k >= dim) throw std::invalid_argument("spacing_prefix_cdf needs 1 <= k < dim");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("domain is [0, 1]");
  // Z^(k) is the k-th order statistic of dim-1 uniforms.
  const int m = dim - 1;
  double cdf = 0.0;
  for (int j = k; j <= m; ++j) {
    cdf += static_cast<double>(binomial(static_cast<u64>(m), static_cast<unsigned>(j))) *
           std::pow(x, j) * std::pow(1.0 - x, m - j);
  }
  return cdf;
}

}  // namespace hyperlat::limits
