#include "hyperlat/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace hyperlat::sampling {

std::string method_name(Method m) {
  return m == Method::conditional_count ? "conditional-count" : "rejection";
}

Method parse_method(std::string_view name) {
  if (name == "conditional-count") return Method::conditional_count;
  if (name == "rejection") return Method::rejection;
  throw std::invalid_argument("unknown sampling method: " + std::string(name));
}

Sampler::Sampler(const SamplerConfig& config, counting::CountOptions opts) : config_(config) {
  const auto& region = config_.region;
  region.validate();
  if (!region.nonempty()) throw std::invalid_argument("region is empty: threshold below C(dim, degree)");
  if (config_.method == Method::rejection && region.degree != 1) {
    throw std::invalid_argument("rejection sampling is only available for degree 1");
  }

  if (region.degree == region.dim) {
    auto table = std::make_shared<counting::QuotientTable>(region.dim, region.threshold);
    quotients_ = table;
    total_ = table->value(region.dim, region.threshold);
    if (region.dim > 1) {
      const u64 n = region.threshold;
      u128 cum = 0;
      for (u64 v = 1; v <= n;) {
        u64 q = n / v;
        u64 hi = n / q;
        u128 per = table->value(region.dim - 1, q);
        cum = checked_add(cum, checked_mul(static_cast<u128>(hi - v + 1), per));
        first_blocks_.push_back(Block{v, hi, per, cum});
        v = hi + 1;
      }
    }
    return;
  }

  if (region.degree == 1) {
    total_ = binomial(region.threshold, static_cast<unsigned>(region.dim));
    return;
  }

  auto per_value = counting::first_coord_counts(region, opts);
  first_cum_.resize(per_value.size());
  u128 cum = 0;
  for (std::size_t i = 0; i < per_value.size(); ++i) {
    cum = checked_add(cum, per_value[i]);
    first_cum_[i] = cum;
  }
  total_ = cum;
}

LatticePoint Sampler::sample(SplitMix64& stream) const {
  const auto& region = config_.region;
  if (region.degree == region.dim) return sample_product(stream);
  if (region.degree == 1) {
    return config_.method == Method::rejection ? sample_rejection(stream) : sample_simplex(stream);
  }
  return sample_general(stream);
}

LatticePoint Sampler::sample_product(SplitMix64& stream) const {
  const auto& region = config_.region;
  LatticePoint point;
  point.coords.resize(static_cast<std::size_t>(region.dim));
  u64 n_cur = region.threshold;
  for (int d = 0; d < region.dim - 1; ++d) {
    const int levels_left = region.dim - d - 1;  // completion levels after this coordinate
    u64 chosen;
    if (d == 0) {
      u128 target = stream.below128(total_);
      auto it = std::upper_bound(first_blocks_.begin(), first_blocks_.end(), target,
                                 [](u128 t, const Block& b) { return t < b.cum; });
      const Block& b = *it;
      u128 before = b.cum - checked_mul(static_cast<u128>(b.v_hi - b.v_lo + 1), b.per_value);
      u128 offset = target - before;
      chosen = b.v_lo + static_cast<u64>(offset / b.per_value);
    } else {
      u128 total_here = quotients_->value(levels_left + 1, n_cur);
      u128 target = stream.below128(total_here);
      u128 acc = 0;
      chosen = 0;
      for (u64 v = 1; v <= n_cur;) {
        u64 q = n_cur / v;
        u64 hi = n_cur / q;
        u128 per = quotients_->value(levels_left, q);
        u128 block = checked_mul(static_cast<u128>(hi - v + 1), per);
        if (target < acc + block) {
          chosen = v + static_cast<u64>((target - acc) / per);
          break;
        }
        acc += block;
        v = hi + 1;
      }
    }
    point.coords[static_cast<std::size_t>(d)] = chosen;
    n_cur /= chosen;
  }
  point.coords[static_cast<std::size_t>(region.dim - 1)] = 1 + stream.below(n_cur);
  return point;
}

LatticePoint Sampler::sample_simplex(SplitMix64& stream) const {
  const auto& region = config_.region;
  LatticePoint point;
  point.coords.resize(static_cast<std::size_t>(region.dim));
  u64 avail = region.threshold;
  for (int d = 0; d < region.dim; ++d) {
    const unsigned s = static_cast<unsigned>(region.dim - d);  // coordinates left, this one included
    if (s == 1) {
      point.coords[static_cast<std::size_t>(d)] = 1 + stream.below(avail);
      break;
    }
    const u128 total_here = binomial(avail, s);
    const u128 target = stream.below128(total_here);
    // cumulative(V) = C(avail, s) - C(avail - V, s); find smallest V with cumulative > target
    u64 lo = 1, hi = avail - s + 1;
    while (lo < hi) {
      u64 mid = lo + (hi - lo) / 2;
      u128 cum = total_here - binomial(avail - mid, s);
      if (cum > target) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    point.coords[static_cast<std::size_t>(d)] = lo;
    avail -= lo;
  }
  return point;
}

LatticePoint Sampler::sample_rejection(SplitMix64& stream) const {
  const auto& region = config_.region;
  LatticePoint point;
  point.coords.resize(static_cast<std::size_t>(region.dim));
  const u64 coord_max = region.threshold - static_cast<u64>(region.dim) + 1;
  for (;;) {
    u128 sum = 0;
    for (int d = 0; d < region.dim; ++d) {
      point.coords[static_cast<std::size_t>(d)] = 1 + stream.below(coord_max);
      sum += point.coords[static_cast<std::size_t>(d)];
    }
    if (sum <= region.threshold) return point;
  }
}

LatticePoint Sampler::sample_general(SplitMix64& stream) const {
  const auto& region = config_.region;
  const int degree = region.degree;
  LatticePoint point;
  point.coords.resize(static_cast<std::size_t>(region.dim));

  u128 target = stream.below128(total_);
  auto it = std::upper_bound(first_cum_.begin(), first_cum_.end(), target);
  const u64 first = static_cast<u64>(it - first_cum_.begin()) + 1;
  point.coords[0] = first;

  auto prefix = sympoly::PrefixCoefficients::start(degree);
  prefix.extend(first);

  // Middle coordinates (only reached for dim >= 4): walk candidate values with
  // exact completion counts.
  for (int d = 1; d < region.dim - 2; ++d) {
    const int remaining_after = region.dim - d - 1;
    u128 total_here = counting::count_completions(prefix, remaining_after + 1, region.threshold);
    u128 tgt = stream.below128(total_here);
    u128 acc = 0;
    u64 chosen = 0;
    for (u64 w = 1;; ++w) {
      auto extended = prefix;
      extended.extend(w);
      u128 cnt = counting::count_completions(extended, remaining_after, region.threshold);
      if (tgt < acc + cnt) {
        chosen = w;
        break;
      }
      acc += cnt;
    }
    point.coords[static_cast<std::size_t>(d)] = chosen;
    prefix.extend(chosen);
  }

  // Final two coordinates (w, z): completions per w are
  // N(w) = floor((T - beta*w)/(beta + alpha*w)), nonincreasing in w; invert by
  // walking the constant-value blocks of N.
  const u128 c_deg = prefix.coeffs[static_cast<std::size_t>(degree)];
  const u128 beta = prefix.coeffs[static_cast<std::size_t>(degree - 1)];
  const u128 alpha = prefix.coeffs[static_cast<std::size_t>(degree - 2)];
  const u128 big_t = static_cast<u128>(region.threshold) - c_deg;

  auto count_at = [&](u128 w) -> u128 {
    u128 num = big_t - checked_mul(beta, w);  // caller keeps w below the root
    return num / (beta + checked_mul(alpha, w));
  };

  u128 total_tail = 0;
  {
    // sum of N(w) over all w with N(w) >= 1, by blocks
    u128 w = 1;
    while (checked_mul(beta, w) <= big_t) {
      u128 q = count_at(w);
      if (q == 0) break;
      u128 w_hi = (big_t - checked_mul(q, beta)) / (beta + checked_mul(q, alpha));
      total_tail = checked_add(total_tail, checked_mul(w_hi - w + 1, q));
      w = w_hi + 1;
    }
  }
  u128 tgt = stream.below128(total_tail);
  u128 acc = 0;
  u128 w = 1;
  for (;;) {
    u128 q = count_at(w);
    u128 w_hi = (big_t - checked_mul(q, beta)) / (beta + checked_mul(q, alpha));
    u128 block = checked_mul(w_hi - w + 1, q);
    if (tgt < acc + block) {
      u128 offset = tgt - acc;
      point.coords[static_cast<std::size_t>(region.dim - 2)] = static_cast<u64>(w + offset / q);
      point.coords[static_cast<std::size_t>(region.dim - 1)] = static_cast<u64>(1 + offset % q);
      break;
    }
    acc += block;
    w = w_hi + 1;
  }
  return point;
}

std::vector<LatticePoint> sample_batch(const SamplerConfig& config, u64 m, counting::CountOptions opts) {
  Sampler sampler(config, opts);
  SplitMix64 stream = derive_stream(config.seed, config.method == Method::rejection ? 1 : 0);
  std::vector<LatticePoint> out;
  out.reserve(m);
  for (u64 i = 0; i < m; ++i) out.push_back(sampler.sample(stream));
  return out;
}

std::vector<double> log_coords(const LatticePoint& point, u64 threshold) {
  if (threshold < 2) throw std::invalid_argument("log_coords needs threshold >= 2");
  const double log_n = std::log(static_cast<double>(threshold));
  std::vector<double> out;
  out.reserve(point.coords.size());
  for (u64 c : point.coords) out.push_back(std::log(static_cast<double>(c)) / log_n);
  return out;
}

void dump_csv(std::span<const LatticePoint> points, std::ostream& out) {
  if (points.empty()) return;
  for (std::size_t k = 0; k < points.front().coords.size(); ++k) {
    out << (k ? "," : "") << 'i' << (k + 1);
  }
  out << '\n';
  for (const auto& p : points) {
    for (std::size_t k = 0; k < p.coords.size(); ++k) {
      out << (k ? "," : "") << p.coords[k];
    }
    out << '\n';
  }
}

void dump_csv(std::span<const LatticePoint> points, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  dump_csv(points, out);
}

std::vector<LatticePoint> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<LatticePoint> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    LatticePoint p;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      std::string_view cell(line.data() + pos, (comma == std::string::npos ? line.size() : comma) - pos);
      p.coords.push_back(static_cast<u64>(parse_u128(cell)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_metadata(const SamplerConfig& config, u64 draws, const std::filesystem::path& path) {
  nlohmann::ordered_json meta;
  meta["region"] = {{"l", config.region.degree}, {"r", config.region.dim}, {"n", config.region.threshold}};
  meta["seed"] = config.seed;
  meta["method"] = method_name(config.method);
  meta["rng"] = kRngAlgorithm;
  meta["draws"] = draws;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << meta.dump(2) << '\n';
}

}  // namespace hyperlat::sampling
