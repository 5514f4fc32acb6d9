#include "hyperlat/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hyperlat/arithmetics.hpp"

namespace hyperlat::experiments {

double ArithmeticFunction::eval(u128 m) const {
  if (m == 0) throw std::invalid_argument("arithmetic functions are defined on positive integers");
  switch (kind) {
    case Kind::identity:
      return static_cast<double>(m);
    case Kind::power:
      return std::pow(static_cast<double>(m), beta);
    case Kind::log:
      return std::log(static_cast<double>(m));
    case Kind::indicator_of_one:
      return m == 1 ? 1.0 : 0.0;
    case Kind::table: {
      auto it = values->find(m);
      if (it == values->end()) {
        throw std::domain_error("table-based function undefined at " + to_decimal(m));
      }
      return it->second;
    }
  }
  throw std::logic_error("unreachable");
}

bool ArithmeticFunction::integer_valued() const {
  return kind == Kind::identity || kind == Kind::indicator_of_one;
}

u128 ArithmeticFunction::eval_exact(u128 m) const {
  if (kind == Kind::identity) return m;
  if (kind == Kind::indicator_of_one) return m == 1 ? 1 : 0;
  throw std::logic_error("eval_exact on non-integer-valued function");
}

std::string ArithmeticFunction::name() const {
  switch (kind) {
    case Kind::identity:
      return "identity";
    case Kind::power:
      return "pow:" + format_double(beta);
    case Kind::log:
      return "log";
    case Kind::indicator_of_one:
      return "ind1";
    case Kind::table:
      return "table";
  }
  return "?";
}

ArithmeticFunction ArithmeticFunction::identity() { return {}; }

ArithmeticFunction ArithmeticFunction::power(double beta) {
  ArithmeticFunction f;
  f.kind = Kind::power;
  f.beta = beta;
  return f;
}

ArithmeticFunction ArithmeticFunction::logarithm() {
  ArithmeticFunction f;
  f.kind = Kind::log;
  return f;
}

ArithmeticFunction ArithmeticFunction::indicator_of_one() {
  ArithmeticFunction f;
  f.kind = Kind::indicator_of_one;
  return f;
}

ArithmeticFunction ArithmeticFunction::from_table(std::map<u128, double> table) {
  ArithmeticFunction f;
  f.kind = Kind::table;
  f.values = std::make_shared<const std::map<u128, double>>(std::move(table));
  return f;
}

ArithmeticFunction ArithmeticFunction::parse(std::string_view text) {
  if (text == "identity") return identity();
  if (text == "log") return logarithm();
  if (text == "ind1") return indicator_of_one();
  if (text.starts_with("pow:")) {
    return power(std::stod(std::string(text.substr(4))));
  }
  if (text.starts_with("table:")) {
    std::ifstream in(std::string(text.substr(6)));
    if (!in) throw std::invalid_argument("cannot open table file");
    std::map<u128, double> table;
    std::string key;
    double value;
    while (in >> key >> value) table[parse_u128(key)] = value;
    return from_table(std::move(table));
  }
  throw std::invalid_argument("unknown arithmetic function: " + std::string(text));
}

namespace {

u128 combine(GcdLcm mode, std::span<const u64> coords) {
  return mode == GcdLcm::gcd ? static_cast<u128>(arith::gcd_vec(coords)) : arith::lcm_vec(coords);
}

}  // namespace

HypersumResult hypersum(const counting::RegionSpec& region, const ArithmeticFunction& f, GcdLcm mode,
                        const counting::CountOptions& opts) {
  HypersumResult out;
  out.exact = true;
  const bool exact_sum = f.integer_valued();
  out.has_exact_sum = exact_sum;
  u128 points = 0;
  u128 int_acc = 0;
  double real_acc = 0.0;
  counting::for_each_point(region, [&](std::span<const u64> coords) {
    ++points;
    const u128 value = combine(mode, coords);
    if (exact_sum) {
      int_acc = checked_add(int_acc, f.eval_exact(value));
    } else {
      real_acc += f.eval(value);
    }
  }, opts);
  out.region_size = points;
  if (exact_sum) {
    out.exact_sum = int_acc;
    out.sum = static_cast<double>(int_acc);
  } else {
    out.sum = real_acc;
  }
  return out;
}

HypersumResult hypersum_sampled(const counting::RegionSpec& region, const ArithmeticFunction& f,
                                GcdLcm mode, u64 draws, u64 seed,
                                const counting::CountOptions& opts) {
  if (draws == 0) throw std::invalid_argument("sampled hypersum needs draws >= 1");
  HypersumResult out;
  out.exact = false;
  out.draws = draws;
  out.seed = seed;
  sampling::SamplerConfig config{region, seed, sampling::Method::conditional_count};
  sampling::Sampler sampler(config, opts);
  SplitMix64 stream = derive_stream(seed, 0);
  double acc = 0.0, acc_sq = 0.0;
  for (u64 i = 0; i < draws; ++i) {
    const auto point = sampler.sample(stream);
    const double v = f.eval(combine(mode, point.coords));
    acc += v;
    acc_sq += v * v;
  }
  const double m = static_cast<double>(draws);
  const double mean = acc / m;
  const double var = std::max(0.0, (acc_sq - m * mean * mean) / std::max(1.0, m - 1.0));
  out.region_size = sampler.region_size();
  const double size = static_cast<double>(out.region_size);
  out.sum = size * mean;
  out.std_error = size * std::sqrt(var / m);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["experiment"] = report.id;
  j["l"] = report.degree;
  j["r"] = report.dim;
  j["n"] = report.threshold;
  j["m"] = report.draws;
  j["seed"] = report.seed;
  j["exact"] = report.draws == 0;
  j["target"] = format_double(report.target);
  j["target_provenance"] = report.target_provenance;
  j["empirical"] = format_double(report.empirical);
  j["stat_kind"] = report.stat_kind;
  j["stat"] = format_double(report.stat);
  j["tolerance"] = format_double(report.tolerance);
  j["verdict"] = report.pass ? "pass" : "fail";
  j["details"] = report.details;
  return j;
}

std::string csv_header() { return "experiment,l,r,n,m,target,empirical,stat,tol,verdict"; }

std::string to_csv_row(const ExperimentReport& report) {
  std::ostringstream os;
  os << report.id << ',' << report.degree << ',' << report.dim << ',' << report.threshold << ','
     << report.draws << ',' << format_double(report.target) << ','
     << format_double(report.empirical) << ',' << format_double(report.stat) << ','
     << format_double(report.tolerance) << ',' << (report.pass ? "pass" : "fail");
  return os.str();
}

namespace {

ExperimentReport base_report(std::string id, const counting::RegionSpec& region, u64 draws, u64 seed) {
  ExperimentReport report;
  report.id = std::move(id);
  report.degree = region.degree;
  report.dim = region.dim;
  report.threshold = region.threshold;
  report.draws = draws;
  report.seed = seed;
  return report;
}

void finish(ExperimentReport& report) { report.pass = report.stat <= report.tolerance; }

double ratio_exponent(const counting::RegionSpec& region) {
  return static_cast<double>(region.dim) / static_cast<double>(region.degree);
}

}  // namespace

ExperimentReport gcd_limit_gate(const counting::RegionSpec& region, const ArithmeticFunction& f,
                                u64 draws, u64 seed, double tolerance,
                                const counting::CountOptions& opts) {
  ExperimentReport report = base_report("gcd-limit", region, draws, seed);
  double target = 0.0;
  double tail_bound = 0.0;
  if (f.kind == ArithmeticFunction::Kind::indicator_of_one) {
    target = limits::gcd_limit_pmf(region.dim, 1);
  } else {
    const u64 cutoff = 100'000;
    double max_abs = 0.0;
    for (u64 m = 1; m <= cutoff; ++m) {
      const double fm = f.eval(m);
      max_abs = std::max(max_abs, std::fabs(fm));
      target += fm * limits::gcd_limit_pmf(region.dim, m);
    }
    // |f| <= max observed value is the boundedness assumption recorded below.
    tail_bound = max_abs *
                 std::pow(static_cast<double>(cutoff), 1.0 - static_cast<double>(region.dim)) /
                 (static_cast<double>(region.dim - 1) * limits::zeta(region.dim));
  }
  report.target = target;
  report.target_provenance = "sum_m f(m) m^-r/zeta(r)";

  if (draws == 0) {
    const auto sum = hypersum(region, f, GcdLcm::gcd, opts);
    report.empirical = sum.mean();
    report.stat_kind = "abs_err";
    report.stat = std::fabs(report.empirical - target);
    report.tolerance = tolerance;
  } else {
    const auto sum = hypersum_sampled(region, f, GcdLcm::gcd, draws, seed, opts);
    report.empirical = sum.mean();
    const double se = sum.std_error / static_cast<double>(sum.region_size);
    report.stat_kind = "z";
    report.stat = se > 0.0 ? std::fabs(report.empirical - target) / se : 0.0;
    report.tolerance = tolerance;
    report.details = "se=" + format_double(se);
  }
  if (tail_bound > 0.0) {
    report.details += (report.details.empty() ? "" : " ") + std::string("target_tail_bound=") +
                      format_double(tail_bound);
  }
  finish(report);
  return report;
}

ExperimentReport lcm_moment_gate(const counting::RegionSpec& region, double beta, u64 draws,
                                 u64 seed, double tolerance, const limits::LimitModel& model,
                                 const counting::CountOptions& opts) {
  ExperimentReport report = base_report("lcm-moment", region, draws, seed);
  const auto prime_moment = limits::lcm_ratio_moment(region.dim, beta, model);
  double u_moment;
  std::string u_note;
  if (region.degree == region.dim) {
    u_moment = 1.0 / (1.0 + beta);
    u_note = "closed form 1/(1+beta)";
  } else {
    // Lattice approximation of E[U^beta] at this region's own threshold.
    double acc = 0.0;
    u128 points = 0;
    const double scale = std::pow(static_cast<double>(region.threshold), ratio_exponent(region));
    counting::for_each_point(region, [&](std::span<const u64> coords) {
      u128 prod = 1;
      for (u64 c : coords) prod = checked_mul(prod, c);
      acc += std::pow(static_cast<double>(prod) / scale, beta);
      ++points;
    }, opts);
    u_moment = acc / static_cast<double>(points);
    u_note = "lattice approximation at n=" + std::to_string(region.threshold);
  }
  report.target = u_moment * prime_moment.value;
  report.target_provenance = "E[U^beta] * prime product moment";
  report.details = "prime_moment=" + format_double(prime_moment.value) +
                   " prime_moment_err=" + format_double(prime_moment.error_bound) + " U_moment: " + u_note;

  const double scale = std::pow(static_cast<double>(region.threshold), ratio_exponent(region));
  if (draws == 0) {
    double acc = 0.0;
    u128 points = 0;
    counting::for_each_point(region, [&](std::span<const u64> coords) {
      acc += std::pow(static_cast<double>(arith::lcm_vec(coords)) / scale, beta);
      ++points;
    }, opts);
    report.empirical = acc / static_cast<double>(points);
  } else {
    sampling::SamplerConfig config{region, seed, sampling::Method::conditional_count};
    sampling::Sampler sampler(config, opts);
    SplitMix64 stream = derive_stream(seed, 0);
    double acc = 0.0;
    for (u64 i = 0; i < draws; ++i) {
      const auto point = sampler.sample(stream);
      acc += std::pow(static_cast<double>(arith::lcm_vec(point.coords)) / scale, beta);
    }
    report.empirical = acc / static_cast<double>(draws);
  }
  report.stat_kind = "rel_err";
  report.stat = std::fabs(report.empirical - report.target) / std::fabs(report.target);
  report.tolerance = tolerance;
  finish(report);
  return report;
}

ExperimentReport product_ks_gate(const counting::RegionSpec& region, u64 draws, u64 seed,
                                 double tolerance, u64 ref_threshold,
                                 const counting::CountOptions& opts) {
  if (draws == 0) throw std::invalid_argument("product_ks_gate needs draws >= 1");
  ExperimentReport report = base_report("product-ks", region, draws, seed);
  sampling::SamplerConfig config{region, seed, sampling::Method::conditional_count};
  sampling::Sampler sampler(config, opts);
  SplitMix64 stream = derive_stream(seed, 0);
  const double scale = std::pow(static_cast<double>(region.threshold), ratio_exponent(region));
  std::vector<double> samples;
  samples.reserve(draws);
  for (u64 i = 0; i < draws; ++i) {
    const auto point = sampler.sample(stream);
    u128 prod = 1;
    for (u64 c : point.coords) prod = checked_mul(prod, c);
    samples.push_back(static_cast<double>(prod) / scale);
  }

  report.target = 0.0;
  report.empirical = 0.0;
  report.stat_kind = "ks";
  if (region.degree == region.dim) {
    report.target_provenance = "uniform product limit";
    report.stat = stats::ks_statistic(std::move(samples),
                                      [](double x) { return std::clamp(x, 0.0, 1.0); });
  } else if (region.degree == 1 && region.dim == 2) {
    report.target_provenance = "closed-form U_{1,2} CDF";
    report.stat = stats::ks_statistic(
        std::move(samples), [](double x) { return limits::u12_cdf(std::clamp(x, 0.0, 0.25)); });
  } else {
    // Lattice-approximated reference CDF, evaluated for all samples in one
    // enumeration pass over the reference region.
    if (ref_threshold == 0) throw std::invalid_argument("reference threshold required for this region");
    report.target_provenance = "lattice-approximated product CDF at n=" + std::to_string(ref_threshold);
    std::sort(samples.begin(), samples.end());
    std::vector<u128> caps(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double clamped = std::clamp(samples[i], 0.0, limits::x_star(region.degree, region.dim));
      const u64 den = 1ULL << 40;
      const u64 num = static_cast<u64>(clamped * static_cast<double>(den));
      caps[i] = floor_scaled_root(Rational(num, den), ref_threshold,
                                  static_cast<unsigned>(region.degree),
                                  static_cast<unsigned>(region.dim));
    }
    std::vector<u64> bucket(samples.size() + 1, 0);
    u128 ref_total = 0;
    counting::RegionSpec ref{region.degree, region.dim, ref_threshold};
    counting::for_each_point(ref, [&](std::span<const u64> coords) {
      u128 prod = 1;
      for (u64 c : coords) prod = checked_mul(prod, c);
      const auto idx = std::lower_bound(caps.begin(), caps.end(), prod) - caps.begin();
      ++bucket[static_cast<std::size_t>(idx)];
      ++ref_total;
    }, opts);
    // bucket prefix sums: number of reference points with product <= caps[i]
    double ks = 0.0;
    u64 cum = 0;
    const double m = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      cum += bucket[i];
      const double f = static_cast<double>(cum) / static_cast<double>(ref_total);
      ks = std::max(ks, std::fabs(f - static_cast<double>(i) / m));
      ks = std::max(ks, std::fabs(static_cast<double>(i + 1) / m - f));
    }
    report.stat = ks;
  }
  report.tolerance = tolerance;
  finish(report);
  return report;
}

ExperimentReport logcoord_ks_gate(int dim, u64 threshold, u64 draws, u64 seed, double tolerance,
                                  bool check_cumulative, double cumulative_tolerance,
                                  const counting::CountOptions& opts) {
  if (draws == 0) throw std::invalid_argument("logcoord_ks_gate needs draws >= 1");
  counting::RegionSpec region{dim, dim, threshold};
  ExperimentReport report = base_report("logcoord-ks", region, draws, seed);
  sampling::SamplerConfig config{region, seed, sampling::Method::conditional_count};
  sampling::Sampler sampler(config, opts);
  SplitMix64 stream = derive_stream(seed, 0);

  std::vector<double> first;
  first.reserve(draws);
  std::vector<std::vector<double>> prefixes(static_cast<std::size_t>(dim - 1));
  if (check_cumulative) {
    for (auto& v : prefixes) v.reserve(draws);
  }
  const double log_n = std::log(static_cast<double>(threshold));
  for (u64 i = 0; i < draws; ++i) {
    const auto point = sampler.sample(stream);
    first.push_back(std::log(static_cast<double>(point.coords[0])) / log_n);
    if (check_cumulative) {
      u128 prod = 1;
      for (int k = 0; k + 1 < dim; ++k) {
        prod = checked_mul(prod, point.coords[static_cast<std::size_t>(k)]);
        prefixes[static_cast<std::size_t>(k)].push_back(std::log(static_cast<double>(prod)) / log_n);
      }
    }
  }

  report.stat_kind = "ks";
  report.stat = stats::ks_statistic(std::move(first),
                                    [dim](double x) { return limits::spacing_marginal_cdf(dim, std::clamp(x, 0.0, 1.0)); });
  report.tolerance = tolerance;
  report.target_provenance = "spacing marginal 1-(1-x)^(r-1)";
  finish(report);

  if (check_cumulative) {
    const double cum_tol = cumulative_tolerance > 0.0 ? cumulative_tolerance : tolerance;
    for (int k = 1; k < dim; ++k) {
      const double d = stats::ks_statistic(
          std::move(prefixes[static_cast<std::size_t>(k - 1)]),
          [dim, k](double x) { return limits::spacing_prefix_cdf(dim, k, std::clamp(x, 0.0, 1.0)); });
      report.details += (report.details.empty() ? "" : " ") + std::string("cum_ks_k") +
                        std::to_string(k) + "=" + format_double(d);
      if (d > cum_tol) report.pass = false;
    }
  }
  return report;
}

ExperimentReport valuation_gate(const counting::RegionSpec& region, std::span<const u64> primes,
                                const std::vector<std::vector<u32>>& exponents, double tolerance,
                                const counting::CountOptions& opts) {
  if (exponents.size() != static_cast<std::size_t>(region.dim)) {
    throw std::invalid_argument("one exponent row per coordinate required");
  }
  for (u64 p : primes) {
    if (!arith::is_prime(p)) throw std::domain_error("valuation gate requires prime moduli bases");
  }
  std::vector<u64> mu(static_cast<std::size_t>(region.dim), 1);
  double target = 1.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (exponents[k].size() != primes.size()) throw std::invalid_argument("exponent row size mismatch");
    for (std::size_t t = 0; t < primes.size(); ++t) {
      for (u32 e = 0; e < exponents[k][t]; ++e) {
        u128 next = checked_mul(mu[k], primes[t]);
        if (next > std::numeric_limits<u64>::max()) throw std::overflow_error("modulus overflow");
        mu[k] = static_cast<u64>(next);
      }
    }
    target /= static_cast<double>(mu[k]);
  }
  ExperimentReport report = base_report("valuation", region, 0, 0);
  report.target = target;
  report.target_provenance = "prod_k mu_k^-1";
  const u128 total = counting::count(region, opts);
  const u128 restricted = counting::count_with_divisibility(region, mu, opts);
  report.empirical = static_cast<double>(restricted) / static_cast<double>(total);
  report.stat_kind = "rel_err";
  report.stat = std::fabs(report.empirical - target) / target;
  report.tolerance = tolerance;
  std::string mus;
  for (std::size_t k = 0; k < mu.size(); ++k) mus += (k ? "," : "") + std::to_string(mu[k]);
  report.details = "mu=" + mus;
  finish(report);
  return report;
}

ExperimentReport joint_cdf_gate(const counting::RegionSpec& region, std::span<const Rational> alphas,
                                u64 ref_threshold, double tolerance,
                                const counting::CountOptions& opts) {
  if (region.degree >= region.dim) throw std::invalid_argument("joint_cdf_gate needs degree < dim");
  if (alphas.size() != static_cast<std::size_t>(region.dim)) {
    throw std::invalid_argument("one alpha per coordinate required");
  }
  if (ref_threshold <= region.threshold) {
    throw std::invalid_argument("reference threshold must exceed the region threshold");
  }
  auto box_ratio = [&](u64 n) {
    counting::RegionSpec r{region.degree, region.dim, n};
    std::vector<u64> box;
    box.reserve(alphas.size());
    for (const Rational& a : alphas) {
      box.push_back(floor_scaled_root(a, n, static_cast<unsigned>(region.degree), 1));
    }
    const u128 total = counting::count(r, opts);
    const u128 boxed = counting::count_boxed(r, box, opts);
    return static_cast<double>(boxed) / static_cast<double>(total);
  };
  ExperimentReport report = base_report("joint-cdf", region, 0, 0);
  report.empirical = box_ratio(region.threshold);
  report.target = box_ratio(ref_threshold);
  report.target_provenance = "box-restricted count at reference n=" + std::to_string(ref_threshold);
  report.stat_kind = "abs_err";
  report.stat = std::fabs(report.empirical - report.target);
  report.tolerance = tolerance;
  finish(report);
  return report;
}

}  // namespace hyperlat::experiments
