#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "hyperlat/acceptance.hpp"
#include "hyperlat/arithmetics.hpp"
#include "hyperlat/experiments.hpp"

using namespace hyperlat;

namespace {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  u64 budget = 1'000'000'000;
  int threads = 1;
  std::string cache_dir;
  std::string format = "json";
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonOpts& common) {
  cmd->add_option("--budget", common.budget, "DFS node budget")->envname("HYPERLAT_BUDGET");
  cmd->add_option("--threads", common.threads, "worker threads for counting")
      ->envname("HYPERLAT_THREADS");
  cmd->add_option("--cache-dir", common.cache_dir, "count cache directory")
      ->envname("HYPERLAT_CACHE_DIR");
  cmd->add_option("--format", common.format, "report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->envname("HYPERLAT_FORMAT");
  cmd->add_option("--out", common.out_path, "write output to this file instead of stdout");
}

counting::CountOptions count_options(const CommonOpts& common) {
  counting::CountOptions opts;
  opts.node_budget = common.budget;
  opts.threads = common.threads;
  return opts;
}

std::ostream& output_stream(const CommonOpts& common, std::ofstream& file) {
  if (common.out_path.empty()) return std::cout;
  file.open(common.out_path, std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + common.out_path);
  return file;
}

void emit_report(const experiments::ExperimentReport& report, const CommonOpts& common) {
  std::ofstream file;
  auto& out = output_stream(common, file);
  if (common.format == "csv") {
    out << experiments::csv_header() << '\n' << experiments::to_csv_row(report) << '\n';
  } else {
    out << experiments::to_json(report).dump(2) << '\n';
  }
}

std::vector<u64> parse_u64_list(const std::string& text) {
  std::vector<u64> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!piece.empty()) out.push_back(static_cast<u64>(parse_u128(piece)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!piece.empty()) out.push_back(Rational::parse(piece));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::optional<u128> cache_lookup(const CommonOpts& common, const std::string& key) {
  if (common.cache_dir.empty()) return std::nullopt;
  counting::CountCache cache(common.cache_dir);
  return cache.lookup(key);
}

void cache_store(const CommonOpts& common, const std::string& key, u128 value) {
  if (common.cache_dir.empty()) return;
  counting::CountCache cache(common.cache_dir);
  cache.store(key, value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact counting, sampling and limit-law verification for hyperbolic lattice regions"};
  app.require_subcommand(1);

  int degree = 1, dim = 2;
  u64 threshold = 0;
  u64 seed = 0;
  u64 draws = 0;

  // count
  auto* count_cmd = app.add_subcommand("count", "exact |H_{l,r}(n)|");
  CommonOpts count_common;
  bool orbit = false;
  count_cmd->add_option("--l", degree, "elementary symmetric degree")->required();
  count_cmd->add_option("--r", dim, "dimension")->required();
  count_cmd->add_option("--n", threshold, "threshold")->required();
  count_cmd->add_flag("--orbit", orbit, "count sorted representatives weighted by orbit size");
  add_common(count_cmd, count_common);

  // count-scaled
  auto* scaled_cmd = app.add_subcommand("count-scaled", "exact count with per-coordinate scaling");
  CommonOpts scaled_common;
  std::string scale_text, mu_text, cap_text;
  scaled_cmd->add_option("--l", degree)->required();
  scaled_cmd->add_option("--r", dim)->required();
  scaled_cmd->add_option("--n", threshold)->required();
  scaled_cmd->add_option("--t", scale_text, "comma-separated rational scales, e.g. 1/2,3,5/2");
  scaled_cmd->add_option("--mu", mu_text, "comma-separated divisibility moduli");
  scaled_cmd->add_option("--cap", cap_text, "exact rational bound on the coordinate product");
  add_common(scaled_cmd, scaled_common);

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "exact uniform samples from the region");
  CommonOpts sample_common;
  std::string method_text = "conditional-count";
  std::string dump_path, meta_path;
  sample_cmd->add_option("--l", degree)->required();
  sample_cmd->add_option("--r", dim)->required();
  sample_cmd->add_option("--n", threshold)->required();
  sample_cmd->add_option("--m", draws, "number of draws")->required();
  sample_cmd->add_option("--seed", seed, "stream seed")->envname("HYPERLAT_SEED");
  sample_cmd->add_option("--method", method_text, "conditional-count or rejection");
  sample_cmd->add_option("--dump", dump_path, "write CSV here (stdout otherwise)");
  sample_cmd->add_option("--meta", meta_path, "metadata JSON path (default: <dump>.meta.json)");
  add_common(sample_cmd, sample_common);

  // gcd-dist
  auto* gcd_cmd = app.add_subcommand("gcd-dist", "limit GCD law and finite-n comparison");
  CommonOpts gcd_common;
  u64 pmf_max = 10;
  bool gate = false;
  gcd_cmd->add_option("--r", dim)->required();
  gcd_cmd->add_option("--m-max", pmf_max, "print pmf values for m = 1..m-max");
  gcd_cmd->add_flag("--gate", gate, "compare a finite-n region against the limit law");
  gcd_cmd->add_option("--l", degree, "region degree (gate mode)");
  gcd_cmd->add_option("--n", threshold, "region threshold (gate mode)");
  gcd_cmd->add_option("--sampled", draws, "draws for the sampled gate (0 = exact)");
  gcd_cmd->add_option("--seed", seed)->envname("HYPERLAT_SEED");
  double tolerance = 0.05;
  gcd_cmd->add_option("--tol", tolerance, "gate tolerance (abs_err exact, z sampled)");
  add_common(gcd_cmd, gcd_common);

  // lcm-moment
  auto* lcm_cmd = app.add_subcommand("lcm-moment", "prime-product LCM ratio moment");
  CommonOpts lcm_common;
  double beta = 1.0;
  limits::LimitModel model;
  bool lcm_gate = false;
  double lcm_tol = 0.08;
  lcm_cmd->add_option("--r", dim)->required();
  lcm_cmd->add_option("--beta", beta, "moment order (> 0)");
  lcm_cmd->add_option("--prime-cutoff", model.prime_cutoff, "prime cutoff P")
      ->envname("HYPERLAT_PRIME_CUTOFF");
  lcm_cmd->add_option("--exp-cap", model.exponent_cap, "exponent cap J");
  lcm_cmd->add_option("--eps", model.tolerance, "target tolerance");
  lcm_cmd->add_flag("--gate", lcm_gate, "compare the sampled region moment against the limit");
  lcm_cmd->add_option("--l", degree);
  lcm_cmd->add_option("--n", threshold);
  lcm_cmd->add_option("--m", draws, "draws for the gate (0 = exact enumeration)");
  lcm_cmd->add_option("--seed", seed)->envname("HYPERLAT_SEED");
  lcm_cmd->add_option("--tol", lcm_tol, "gate tolerance (relative)");
  add_common(lcm_cmd, lcm_common);

  // volume
  auto* volume_cmd = app.add_subcommand("volume", "volume of the unit sublevel region");
  CommonOpts volume_common;
  volume_cmd->add_option("--l", degree)->required();
  volume_cmd->add_option("--r", dim)->required();
  volume_cmd->add_option("--n", threshold, "lattice approximation threshold");
  add_common(volume_cmd, volume_common);

  // u-cdf
  auto* ucdf_cmd = app.add_subcommand("u-cdf", "CDF of the normalized coordinate product limit");
  CommonOpts ucdf_common;
  std::string x_text;
  ucdf_cmd->add_option("--l", degree)->required();
  ucdf_cmd->add_option("--r", dim)->required();
  ucdf_cmd->add_option("--x", x_text, "argument (exact rational or decimal)")->required();
  ucdf_cmd->add_option("--n", threshold, "lattice approximation threshold (needed for 1 < l < r)");
  add_common(ucdf_cmd, ucdf_common);

  // spacings
  auto* spacing_cmd = app.add_subcommand("spacings", "log-coordinate spacing laws");
  CommonOpts spacing_common;
  std::string spacing_x;
  bool spacing_gate = false;
  double spacing_tol = 0.05;
  spacing_cmd->add_option("--r", dim)->required();
  spacing_cmd->add_option("--x", spacing_x, "evaluate the marginal spacing CDF at x");
  spacing_cmd->add_flag("--gate", spacing_gate, "KS gate of log V1/log n draws");
  spacing_cmd->add_option("--n", threshold);
  spacing_cmd->add_option("--m", draws);
  spacing_cmd->add_option("--seed", seed)->envname("HYPERLAT_SEED");
  spacing_cmd->add_option("--tol", spacing_tol);
  add_common(spacing_cmd, spacing_common);

  // hypersum
  auto* hyper_cmd = app.add_subcommand("hypersum", "sum of f(GCD) or f(LCM) over a region");
  CommonOpts hyper_common;
  std::string f_text = "identity";
  std::string mode_text = "gcd";
  u64 sampled = 0;
  hyper_cmd->add_option("--l", degree)->required();
  hyper_cmd->add_option("--r", dim)->required();
  hyper_cmd->add_option("--n", threshold)->required();
  hyper_cmd->add_option("--f", f_text, "identity | log | ind1 | pow:<beta> | table:<path>");
  hyper_cmd->add_option("--mode", mode_text, "gcd or lcm")->check(CLI::IsMember({"gcd", "lcm"}));
  hyper_cmd->add_option("--sampled", sampled, "unbiased sampled estimate with this many draws");
  hyper_cmd->add_option("--seed", seed)->envname("HYPERLAT_SEED");
  add_common(hyper_cmd, hyper_common);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the built-in verification suite");
  acceptance::VerifyOptions verify_options;
  std::string verify_out;
  verify_cmd->add_flag("--quick", verify_options.quick,
                       "reduced sizes and recalibrated tolerances (smoke test)");
  verify_cmd->add_option("--seed", verify_options.seed, "base seed for all randomized gates")
      ->envname("HYPERLAT_SEED");
  verify_cmd->add_option("--out", verify_out, "report file prefix (<prefix>.jsonl, <prefix>.csv)");
  verify_cmd->add_option("--threads", verify_options.threads, "worker threads for counting")
      ->envname("HYPERLAT_THREADS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
  }

  try {
    if (*count_cmd) {
      counting::RegionSpec region{degree, dim, threshold};
      region.validate();
      const std::string key = counting::CountCache::key_plain(region) + (orbit ? ":orbit" : "");
      u128 value;
      if (auto hit = cache_lookup(count_common, key)) {
        value = *hit;
      } else {
        auto opts = count_options(count_common);
        opts.orbit_mode = orbit;
        value = counting::count(region, opts);
        cache_store(count_common, key, value);
      }
      std::ofstream file;
      output_stream(count_common, file) << to_decimal(value) << '\n';
    } else if (*scaled_cmd) {
      counting::RegionSpec region{degree, dim, threshold};
      region.validate();
      const auto opts = count_options(scaled_common);
      u128 value;
      std::string key;
      if (!mu_text.empty() && !cap_text.empty()) {
        const auto mu = parse_u64_list(mu_text);
        counting::ProductCap cap{Rational::parse(cap_text)};
        value = counting::count_scaled_constrained(region, mu, cap, opts);
        key.clear();  // combined variant is not cached
      } else if (!mu_text.empty()) {
        const auto mu = parse_u64_list(mu_text);
        key = counting::CountCache::key_divisibility(region, mu);
        if (auto hit = cache_lookup(scaled_common, key)) {
          value = *hit;
        } else {
          value = counting::count_with_divisibility(region, mu, opts);
        }
      } else if (!cap_text.empty()) {
        counting::ProductCap cap{Rational::parse(cap_text)};
        key = counting::CountCache::key_constrained(region, cap.floor());
        if (auto hit = cache_lookup(scaled_common, key)) {
          value = *hit;
        } else {
          value = counting::count_constrained(region, cap, opts);
        }
      } else if (!scale_text.empty()) {
        counting::ScaleVector t{parse_rational_list(scale_text)};
        key = counting::CountCache::key_scaled(region, t);
        if (auto hit = cache_lookup(scaled_common, key)) {
          value = *hit;
        } else {
          value = counting::count_scaled(region, t, opts);
        }
      } else {
        throw usage_error("count-scaled: one of --t, --mu, --cap is required");
      }
      if (!key.empty()) cache_store(scaled_common, key, value);
      std::ofstream file;
      output_stream(scaled_common, file) << to_decimal(value) << '\n';
    } else if (*sample_cmd) {
      sampling::SamplerConfig config{{degree, dim, threshold}, seed,
                                     sampling::parse_method(method_text)};
      const auto points = sampling::sample_batch(config, draws, count_options(sample_common));
      if (dump_path.empty()) {
        sampling::dump_csv(points, std::cout);
      } else {
        sampling::dump_csv(points, std::filesystem::path(dump_path));
        const std::string meta = meta_path.empty() ? dump_path + ".meta.json" : meta_path;
        sampling::write_metadata(config, points.size(), meta);
      }
    } else if (*gcd_cmd) {
      if (gate) {
        auto report = experiments::gcd_limit_gate({degree, dim, threshold},
                                                  experiments::ArithmeticFunction::indicator_of_one(),
                                                  draws, seed, tolerance, count_options(gcd_common));
        emit_report(report, gcd_common);
        if (!report.pass) return 3;
      } else {
        std::ofstream file;
        auto& out = output_stream(gcd_common, file);
        out << "m,pmf\n";
        for (u64 m = 1; m <= pmf_max; ++m) {
          out << m << ',' << experiments::format_double(limits::gcd_limit_pmf(dim, m)) << '\n';
        }
      }
    } else if (*lcm_cmd) {
      if (lcm_gate) {
        auto report = experiments::lcm_moment_gate({degree, dim, threshold}, beta, draws, seed,
                                                   lcm_tol, model, count_options(lcm_common));
        emit_report(report, lcm_common);
        if (!report.pass) return 3;
      } else {
        const auto moment = limits::lcm_ratio_moment(dim, beta, model);
        std::ofstream file;
        auto& out = output_stream(lcm_common, file);
        nlohmann::ordered_json j;
        j["r"] = dim;
        j["beta"] = beta;
        j["value"] = experiments::format_double(moment.value);
        j["error_bound"] = experiments::format_double(moment.error_bound);
        j["prime_cutoff"] = model.prime_cutoff;
        j["exponent_cap"] = model.exponent_cap;
        out << j.dump(2) << '\n';
      }
    } else if (*volume_cmd) {
      const auto estimate = limits::volume(degree, dim, threshold, count_options(volume_common));
      std::ofstream file;
      auto& out = output_stream(volume_common, file);
      nlohmann::ordered_json j;
      j["l"] = degree;
      j["r"] = dim;
      j["value"] = experiments::format_double(estimate.value);
      j["lower_bound"] = estimate.lower_bound;
      j["n"] = estimate.approx_threshold;
      out << j.dump(2) << '\n';
    } else if (*ucdf_cmd) {
      const double value =
          limits::u_cdf(degree, dim, Rational::parse(x_text), threshold, count_options(ucdf_common));
      std::ofstream file;
      output_stream(ucdf_common, file) << experiments::format_double(value) << '\n';
    } else if (*spacing_cmd) {
      if (spacing_gate) {
        auto report = experiments::logcoord_ks_gate(dim, threshold, draws, seed, spacing_tol, true,
                                                    0.0, count_options(spacing_common));
        emit_report(report, spacing_common);
        if (!report.pass) return 3;
      } else {
        if (spacing_x.empty()) throw usage_error("spacings: --x or --gate is required");
        const double x = std::stod(spacing_x);
        std::ofstream file;
        output_stream(spacing_common, file)
            << experiments::format_double(limits::spacing_marginal_cdf(dim, x)) << '\n';
      }
    } else if (*hyper_cmd) {
      const auto f = experiments::ArithmeticFunction::parse(f_text);
      const auto mode = mode_text == "gcd" ? experiments::GcdLcm::gcd : experiments::GcdLcm::lcm;
      counting::RegionSpec region{degree, dim, threshold};
      const auto result =
          sampled == 0 ? experiments::hypersum(region, f, mode, count_options(hyper_common))
                       : experiments::hypersum_sampled(region, f, mode, sampled, seed,
                                                       count_options(hyper_common));
      std::ofstream file;
      auto& out = output_stream(hyper_common, file);
      nlohmann::ordered_json j;
      j["sum"] = result.has_exact_sum ? nlohmann::ordered_json(to_decimal(result.exact_sum))
                                      : nlohmann::ordered_json(experiments::format_double(result.sum));
      j["region_size"] = to_decimal(result.region_size);
      j["exact"] = result.exact;
      if (!result.exact) {
        j["std_error"] = experiments::format_double(result.std_error);
        j["draws"] = result.draws;
        j["seed"] = result.seed;
      }
      out << j.dump(2) << '\n';
    } else if (*verify_cmd) {
      if (!verify_options.quick) {
        std::error_code ec;
        auto self = std::filesystem::canonical(argv[0], ec);
        if (!ec) verify_options.cli_path = self.string();
      }
      const auto results = acceptance::run_all(verify_options, std::cerr);
      const int failures = acceptance::print_table(results, std::cout);
      if (!verify_out.empty()) {
        std::ofstream jsonl(verify_out + ".jsonl", std::ios::trunc);
        std::ofstream csv(verify_out + ".csv", std::ios::trunc);
        csv << experiments::csv_header() << '\n';
        for (const auto& r : results) {
          for (const auto& report : r.reports) {
            jsonl << experiments::to_json(report).dump() << '\n';
            csv << experiments::to_csv_row(report) << '\n';
          }
        }
      }
      return failures == 0 ? 0 : 3;
    }
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const budget_exceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
