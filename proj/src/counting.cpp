#include "hyperlat/counting.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace hyperlat::counting {

void RegionSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dim out of range [1, 12]");
  if (degree < 1 || degree > dim) throw std::invalid_argument("degree out of range [1, dim]");
}

u128 RegionSpec::min_threshold() const {
  return binomial(static_cast<u64>(dim), static_cast<unsigned>(degree));
}

bool RegionSpec::nonempty() const { return threshold >= min_threshold(); }

u128 ProductCap::floor() const { return static_cast<u128>(cap.num) / cap.den; }

namespace {

constexpr int kMaxCoeffs = kMaxDim + 1;
using Coeffs = std::array<u128, kMaxCoeffs>;

struct DfsSpec {
  int degree = 1;
  int dim = 1;
  u128 limit = 0;
  std::array<u128, kMaxDim> mult{};
  bool has_cap = false;
  u128 cap = 0;
  std::array<u64, kMaxDim> box{};

  // suffix_e[d][j] = e_j(mult_d, ..., mult_{dim-1}); suffix_prod[d] = prod of the same.
  std::array<Coeffs, kMaxDim + 1> suffix_e{};
  std::array<u128, kMaxDim + 1> suffix_prod{};

  void finish() {
    suffix_e[dim].fill(0);
    suffix_e[dim][0] = 1;
    suffix_prod[dim] = 1;
    for (int d = dim - 1; d >= 0; --d) {
      suffix_e[d] = suffix_e[d + 1];
      for (int j = degree; j >= 1; --j) {
        suffix_e[d][j] = checked_add(suffix_e[d][j], checked_mul(suffix_e[d][j - 1], mult[d]));
      }
      suffix_prod[d] = checked_mul(suffix_prod[d + 1], mult[d]);
    }
  }
};

DfsSpec make_spec(const RegionSpec& region, std::span<const u128> mult, std::optional<u128> cap,
                  std::span<const u64> box, u128 limit) {
  region.validate();
  DfsSpec spec;
  spec.degree = region.degree;
  spec.dim = region.dim;
  spec.limit = limit;
  spec.mult.fill(1);
  for (std::size_t k = 0; k < mult.size(); ++k) {
    if (mult[k] == 0) throw std::invalid_argument("multipliers must be positive");
    spec.mult[k] = mult[k];
  }
  spec.has_cap = cap.has_value();
  spec.cap = cap.value_or(0);
  spec.box.fill(std::numeric_limits<u64>::max());
  if (!box.empty()) {
    if (box.size() != static_cast<std::size_t>(region.dim)) {
      throw std::invalid_argument("box size must match dim");
    }
    for (std::size_t k = 0; k < box.size(); ++k) spec.box[k] = box[k];
  }
  spec.finish();
  return spec;
}

class Budget {
 public:
  explicit Budget(u64 limit) : limit_(limit) {}

  struct Local {
    Budget* owner;
    u64 pending = 0;
    void charge() {
      if (++pending >= 8192) flush();
    }
    void flush() {
      owner->add(pending);
      pending = 0;
      owner->check();
    }
    ~Local() { owner->add(pending); }
  };

  Local local() { return Local{this}; }

  void add(u64 amount) { used_.fetch_add(amount, std::memory_order_relaxed); }

  void check() const {
    if (used_.load(std::memory_order_relaxed) > limit_) {
      throw budget_exceeded("DFS node budget exceeded (" + std::to_string(limit_) + ")");
    }
  }

 private:
  u64 limit_;
  std::atomic<u64> used_{0};
};

// A = sum_j c_j * e_{degree-j}(suffix), B = sum_j c_j * e_{degree-1-j}(suffix):
// the minimal constraint value of branch (prefix, x, all-ones suffix) is A + B*x.
void linear_bound_terms(const DfsSpec& spec, int depth, const Coeffs& c, u128& a_out, u128& b_out) {
  const Coeffs& suffix = spec.suffix_e[depth + 1];
  u128 a = 0, b = 0;
  for (int j = 0; j <= spec.degree; ++j) {
    if (c[j] == 0) continue;
    a = checked_add(a, checked_mul(c[j], suffix[spec.degree - j]));
    if (j <= spec.degree - 1) b = checked_add(b, checked_mul(c[j], suffix[spec.degree - 1 - j]));
  }
  a_out = a;
  b_out = b;
}

u128 branch_value_limit(const DfsSpec& spec, int depth, const Coeffs& c, u128 prod) {
  u128 a, b;
  linear_bound_terms(spec, depth, c, a, b);
  if (a > spec.limit) return 0;
  if (b == 0) throw std::invalid_argument("constraint does not bound the remaining coordinates");
  auto denom = try_mul(b, spec.mult[depth]);
  if (!denom) return 0;
  u128 v_hi = (spec.limit - a) / *denom;
  if (spec.has_cap) {
    auto cap_denom = try_mul(prod, spec.mult[depth]);
    if (cap_denom) cap_denom = try_mul(*cap_denom, spec.suffix_prod[depth + 1]);
    if (!cap_denom) return 0;
    v_hi = std::min(v_hi, spec.cap / *cap_denom);
  }
  v_hi = std::min<u128>(v_hi, spec.box[depth]);
  return v_hi;
}

Coeffs extend_coeffs(const Coeffs& c, int degree, u128 x) {
  Coeffs out = c;
  for (int j = degree; j >= 1; --j) {
    out[j] = checked_add(out[j], checked_mul(out[j - 1], x));
  }
  return out;
}

u128 dfs_count(const DfsSpec& spec, Budget::Local& budget, int depth, const Coeffs& c, u128 prod) {
  const u128 v_hi = branch_value_limit(spec, depth, c, prod);
  if (depth == spec.dim - 1) {
    budget.charge();
    return v_hi;
  }
  u128 total = 0;
  for (u128 v = 1; v <= v_hi; ++v) {
    budget.charge();
    u128 x = checked_mul(spec.mult[depth], v);
    Coeffs next = extend_coeffs(c, spec.degree, x);
    total = checked_add(total, dfs_count(spec, budget, depth + 1, next, spec.has_cap ? checked_mul(prod, x) : prod));
  }
  return total;
}

u128 run_dfs(const DfsSpec& spec, const CountOptions& opts, const Coeffs& start) {
  Budget budget(opts.node_budget);
  if (spec.has_cap && spec.cap == 0) return 0;
  const int threads = std::max(1, opts.threads);
  if (threads == 1 || spec.dim == 1) {
    auto local = budget.local();
    return dfs_count(spec, local, 0, start, 1);
  }

  // Partition the first coordinate's residue classes across workers; exact
  // integer partial sums recombine identically for any thread count.
  const u128 v_hi = branch_value_limit(spec, 0, start, 1);
  if (v_hi == 0) return 0;

  std::vector<u128> partial(static_cast<std::size_t>(threads), 0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        auto local = budget.local();
        u128 sum = 0;
        for (u128 v = 1 + static_cast<u128>(t); v <= v_hi; v += threads) {
          local.charge();
          u128 x = checked_mul(spec.mult[0], v);
          Coeffs next = extend_coeffs(start, spec.degree, x);
          sum = checked_add(sum, dfs_count(spec, local, 1, next, spec.has_cap ? x : 1));
        }
        partial[static_cast<std::size_t>(t)] = sum;
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  u128 total = 0;
  for (u128 part : partial) total = checked_add(total, part);
  return total;
}

void dfs_enumerate(const DfsSpec& spec, Budget::Local& budget, int depth, const Coeffs& c, u128 prod,
                   std::array<u64, kMaxDim>& coords,
                   const std::function<void(std::span<const u64>)>& fn) {
  const u128 v_hi = branch_value_limit(spec, depth, c, prod);
  if (depth == spec.dim - 1) {
    for (u128 v = 1; v <= v_hi; ++v) {
      budget.charge();
      coords[depth] = static_cast<u64>(v);
      fn(std::span<const u64>(coords.data(), static_cast<std::size_t>(spec.dim)));
    }
    return;
  }
  for (u128 v = 1; v <= v_hi; ++v) {
    budget.charge();
    coords[depth] = static_cast<u64>(v);
    u128 x = checked_mul(spec.mult[depth], v);
    Coeffs next = extend_coeffs(c, spec.degree, x);
    dfs_enumerate(spec, budget, depth + 1, next, spec.has_cap ? checked_mul(prod, x) : prod, coords, fn);
  }
}

// Weakly decreasing representatives weighted by orbit size r!/prod(multiplicity!).
struct OrbitCtx {
  const DfsSpec* spec;
  u128 dim_factorial;
  std::array<u128, kMaxCoeffs> factorial;
};

u128 dfs_orbit(const OrbitCtx& ctx, Budget::Local& budget, int depth, const Coeffs& c, u128 prod,
               u64 prev, int run_len, u128 fact_completed) {
  const DfsSpec& spec = *ctx.spec;
  u128 v_hi = branch_value_limit(spec, depth, c, prod);
  if (depth > 0) v_hi = std::min<u128>(v_hi, prev);
  if (depth == spec.dim - 1) {
    budget.charge();
    if (v_hi == 0) return 0;
    u128 total = 0;
    const bool can_extend = depth > 0 && v_hi >= prev;
    const u128 distinct_hi = depth == 0 ? v_hi : std::min<u128>(v_hi, prev - 1);
    if (distinct_hi > 0) {
      u128 weight = ctx.dim_factorial / (fact_completed * ctx.factorial[static_cast<std::size_t>(run_len)]);
      total = checked_add(total, checked_mul(distinct_hi, weight));
    }
    if (can_extend) {
      u128 weight = ctx.dim_factorial / (fact_completed * ctx.factorial[static_cast<std::size_t>(run_len + 1)]);
      total = checked_add(total, weight);
    }
    return total;
  }
  u128 total = 0;
  for (u128 v = 1; v <= v_hi; ++v) {
    budget.charge();
    Coeffs next = extend_coeffs(c, spec.degree, v);
    u128 next_prod = spec.has_cap ? checked_mul(prod, v) : prod;
    u128 sub;
    if (depth > 0 && v == prev) {
      sub = dfs_orbit(ctx, budget, depth + 1, next, next_prod, static_cast<u64>(v), run_len + 1,
                      fact_completed);
    } else {
      u128 done = depth == 0 ? 1 : checked_mul(fact_completed, ctx.factorial[static_cast<std::size_t>(run_len)]);
      sub = dfs_orbit(ctx, budget, depth + 1, next, next_prod, static_cast<u64>(v), 1, done);
    }
    total = checked_add(total, sub);
  }
  return total;
}

u128 orbit_count(const RegionSpec& region, std::optional<u128> cap, const CountOptions& opts) {
  DfsSpec spec = make_spec(region, {}, cap, {}, region.threshold);
  if (spec.has_cap && spec.cap == 0) return 0;
  OrbitCtx ctx;
  ctx.spec = &spec;
  ctx.factorial[0] = 1;
  for (int i = 1; i < kMaxCoeffs; ++i) ctx.factorial[static_cast<std::size_t>(i)] = ctx.factorial[static_cast<std::size_t>(i - 1)] * i;
  ctx.dim_factorial = ctx.factorial[static_cast<std::size_t>(region.dim)];
  Budget budget(opts.node_budget);
  auto local = budget.local();
  Coeffs start{};
  start[0] = 1;
  if (region.dim == 1) return dfs_count(spec, local, 0, start, 1);
  return dfs_orbit(ctx, local, 0, start, 1, 0, 1, 1);
}

u64 lcm_u64(u64 a, u64 b) {
  u128 l = checked_mul(static_cast<u128>(a / std::gcd(a, b)), b);
  if (l > std::numeric_limits<u64>::max()) throw std::overflow_error("denominator lcm overflow");
  return static_cast<u64>(l);
}

}  // namespace

CountValue count(const RegionSpec& region, const CountOptions& opts) {
  region.validate();
  if (static_cast<u128>(region.threshold) < region.min_threshold()) return 0;
  if (opts.orbit_mode) return orbit_count(region, std::nullopt, opts);
  if (region.degree == 1) return binomial(region.threshold, static_cast<unsigned>(region.dim));
  if (region.degree == region.dim) {
    QuotientTable table(region.dim, region.threshold);
    return table.value(region.dim, region.threshold);
  }
  DfsSpec spec = make_spec(region, {}, std::nullopt, {}, region.threshold);
  Coeffs start{};
  start[0] = 1;
  return run_dfs(spec, opts, start);
}

CountValue count_scaled(const RegionSpec& region, const ScaleVector& t, const CountOptions& opts) {
  region.validate();
  if (t.t.size() != static_cast<std::size_t>(region.dim)) {
    throw std::invalid_argument("scale vector size must match dim");
  }
  u64 common_den = 1;
  for (const Rational& r : t.t) {
    if (!r.positive()) throw std::invalid_argument("scale factors must be positive");
    common_den = lcm_u64(common_den, r.den);
  }
  std::vector<u128> mult(t.t.size());
  u128 mult_prod = 1;
  for (std::size_t k = 0; k < t.t.size(); ++k) {
    mult[k] = checked_mul(t.t[k].num, common_den / t.t[k].den);
    mult_prod = checked_mul(mult_prod, mult[k]);
  }
  const u128 limit =
      checked_mul(region.threshold, checked_pow(common_den, static_cast<unsigned>(region.degree)));

  if (region.degree == region.dim) {
    u128 top = limit / mult_prod;
    if (top > std::numeric_limits<u64>::max()) throw std::overflow_error("scaled threshold overflow");
    if (top == 0) return 0;
    QuotientTable table(region.dim, static_cast<u64>(top));
    return table.value(region.dim, static_cast<u64>(top));
  }
  if (region.degree == 1 &&
      std::all_of(mult.begin(), mult.end(), [&](u128 m) { return m == mult[0]; })) {
    u128 top = limit / mult[0];
    if (top > std::numeric_limits<u64>::max()) throw std::overflow_error("scaled threshold overflow");
    return binomial(static_cast<u64>(top), static_cast<unsigned>(region.dim));
  }
  DfsSpec spec = make_spec(region, mult, std::nullopt, {}, limit);
  Coeffs start{};
  start[0] = 1;
  return run_dfs(spec, opts, start);
}

CountValue count_with_divisibility(const RegionSpec& region, std::span<const u64> mu,
                                   const CountOptions& opts) {
  ScaleVector t;
  t.t.reserve(mu.size());
  for (u64 m : mu) {
    if (m == 0) throw std::invalid_argument("divisibility moduli must be positive");
    t.t.push_back(Rational(m, 1));
  }
  return count_scaled(region, t, opts);
}

CountValue count_constrained(const RegionSpec& region, const ProductCap& cap, const CountOptions& opts) {
  region.validate();
  const u128 cap_floor = cap.floor();
  if (opts.orbit_mode) return orbit_count(region, cap_floor, opts);
  if (region.degree == region.dim) {
    u128 top = std::min<u128>(region.threshold, cap_floor);
    if (top == 0) return 0;
    QuotientTable table(region.dim, static_cast<u64>(top));
    return table.value(region.dim, static_cast<u64>(top));
  }
  DfsSpec spec = make_spec(region, {}, cap_floor, {}, region.threshold);
  Coeffs start{};
  start[0] = 1;
  return run_dfs(spec, opts, start);
}

CountValue count_boxed(const RegionSpec& region, std::span<const u64> box, const CountOptions& opts) {
  DfsSpec spec = make_spec(region, {}, std::nullopt, box, region.threshold);
  Coeffs start{};
  start[0] = 1;
  return run_dfs(spec, opts, start);
}

CountValue count_scaled_constrained(const RegionSpec& region, std::span<const u64> mu,
                                    const ProductCap& cap, const CountOptions& opts) {
  region.validate();
  if (mu.size() != static_cast<std::size_t>(region.dim)) {
    throw std::invalid_argument("modulus vector size must match dim");
  }
  std::vector<u128> mult(mu.begin(), mu.end());
  const u128 cap_floor = cap.floor();
  if (region.degree == region.dim) {
    u128 mult_prod = 1;
    for (u128 m : mult) mult_prod = checked_mul(mult_prod, m);
    u128 top = std::min<u128>(static_cast<u128>(region.threshold) / mult_prod, cap_floor / mult_prod);
    if (top == 0) return 0;
    QuotientTable table(region.dim, static_cast<u64>(top));
    return table.value(region.dim, static_cast<u64>(top));
  }
  DfsSpec spec = make_spec(region, mult, cap_floor, {}, region.threshold);
  Coeffs start{};
  start[0] = 1;
  return run_dfs(spec, opts, start);
}

CountValue count_completions(const sympoly::PrefixCoefficients& prefix, int remaining_dims,
                             u64 threshold, std::optional<u128> cap_remainder, const CountOptions& opts) {
  if (remaining_dims < 0) throw std::invalid_argument("remaining_dims must be >= 0");
  if (remaining_dims > kMaxDim) throw std::invalid_argument("remaining_dims out of range");
  const int degree = prefix.degree;
  if (degree > kMaxDim) throw std::invalid_argument("degree out of range");
  if (remaining_dims == 0) {
    bool ok = prefix.coeffs[static_cast<std::size_t>(degree)] <= threshold &&
              (!cap_remainder || *cap_remainder >= 1);
    return ok ? 1 : 0;
  }
  DfsSpec spec;
  spec.degree = degree;
  spec.dim = remaining_dims;
  spec.limit = threshold;
  spec.mult.fill(1);
  spec.has_cap = cap_remainder.has_value();
  spec.cap = cap_remainder.value_or(0);
  spec.box.fill(std::numeric_limits<u64>::max());
  spec.finish();
  if (spec.has_cap && spec.cap == 0) return 0;
  Coeffs start{};
  for (int j = 0; j <= degree && j < kMaxCoeffs; ++j) start[j] = prefix.coeffs[static_cast<std::size_t>(j)];
  return run_dfs(spec, opts, start);
}

double asymptotic_count(int degree, int dim, double threshold, std::optional<double> volume) {
  if (dim < 1 || degree < 1 || degree > dim) throw std::invalid_argument("invalid degree/dim");
  if (!(threshold > 0)) throw std::invalid_argument("threshold must be positive");
  if (degree == 1) return std::pow(threshold, dim) / std::tgamma(static_cast<double>(dim) + 1.0);
  if (degree == dim) {
    return threshold * std::pow(std::log(threshold), dim - 1) / std::tgamma(static_cast<double>(dim));
  }
  if (!volume) throw std::invalid_argument("volume estimate required for 1 < degree < dim");
  return *volume * std::pow(threshold, static_cast<double>(dim) / degree);
}

void for_each_point(const EnumSpec& enum_spec, const std::function<void(std::span<const u64>)>& fn,
                    const CountOptions& opts) {
  enum_spec.region.validate();
  std::vector<u128> mult(enum_spec.mult.begin(), enum_spec.mult.end());
  DfsSpec spec = make_spec(enum_spec.region, mult, enum_spec.cap, enum_spec.box,
                           enum_spec.region.threshold);
  if (spec.has_cap && spec.cap == 0) return;
  Budget budget(opts.node_budget);
  auto local = budget.local();
  Coeffs start{};
  start[0] = 1;
  std::array<u64, kMaxDim> coords{};
  dfs_enumerate(spec, local, 0, start, 1, coords, fn);
}

void for_each_point(const RegionSpec& region, const std::function<void(std::span<const u64>)>& fn,
                    const CountOptions& opts) {
  for_each_point(EnumSpec{region, {}, std::nullopt, {}}, fn, opts);
}

std::vector<u128> first_coord_counts(const RegionSpec& region, const CountOptions& opts) {
  region.validate();
  DfsSpec spec = make_spec(region, {}, std::nullopt, {}, region.threshold);
  Budget budget(opts.node_budget);
  auto local = budget.local();
  Coeffs start{};
  start[0] = 1;
  const u128 v_hi = branch_value_limit(spec, 0, start, 1);
  std::vector<u128> counts;
  counts.reserve(static_cast<std::size_t>(v_hi));
  for (u128 v = 1; v <= v_hi; ++v) {
    local.charge();
    if (region.dim == 1) {
      counts.push_back(1);
      continue;
    }
    Coeffs next = extend_coeffs(start, spec.degree, v);
    counts.push_back(dfs_count(spec, local, 1, next, 1));
  }
  return counts;
}

QuotientTable::QuotientTable(int levels, u64 n) : levels_(levels), n_(n) {
  if (levels < 1 || levels > kMaxDim) throw std::invalid_argument("levels out of range");
  sq_ = isqrt(n);
  large_count_ = n == 0 ? 0 : n / (sq_ + 1);
  const std::size_t size = static_cast<std::size_t>(sq_ + large_count_);
  w_.assign(static_cast<std::size_t>(levels), std::vector<u128>(size, 0));

  auto value_at = [&](std::size_t idx) -> u64 {
    if (idx < sq_) return static_cast<u64>(idx) + 1;
    return n_ / (large_count_ - (idx - sq_));
  };

  for (std::size_t idx = 0; idx < size; ++idx) w_[0][idx] = value_at(idx);
  for (int level = 2; level <= levels; ++level) {
    auto& cur = w_[static_cast<std::size_t>(level - 1)];
    for (std::size_t idx = 0; idx < size; ++idx) {
      const u64 v = value_at(idx);
      u128 acc = 0;
      for (u64 i = 1; i <= v;) {
        u64 q = v / i;
        u64 hi = v / q;
        acc = checked_add(acc, checked_mul(static_cast<u128>(hi - i + 1), value(level - 1, q)));
        i = hi + 1;
      }
      cur[idx] = acc;
    }
  }
}

u128 QuotientTable::value(int level, u64 v) const {
  if (v == 0) return 0;
  if (level < 1 || level > levels_) throw std::invalid_argument("level out of range");
  std::size_t idx;
  if (v <= sq_) {
    idx = static_cast<std::size_t>(v - 1);
  } else {
    idx = static_cast<std::size_t>(sq_ + large_count_ - n_ / v);
  }
  return w_[static_cast<std::size_t>(level - 1)][idx];
}

u128 divisor_power_sum_plain(int levels, u64 n) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  if (levels == 1) return n;
  u128 total = 0;
  for (u64 i = 1; i <= n; ++i) {
    total = checked_add(total, divisor_power_sum_plain(levels - 1, n / i));
  }
  return total;
}

CountCache::CountCache(std::filesystem::path directory) {
  std::filesystem::create_directories(directory);
  file_ = directory / "counts.tsv";
  std::ifstream in(file_);
  std::string line;
  while (std::getline(in, line)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    entries_[line.substr(0, tab)] = line.substr(tab + 1);
  }
}

std::optional<u128> CountCache::lookup(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return parse_u128(it->second);
}

void CountCache::store(const std::string& key, u128 value) {
  entries_[key] = to_decimal(value);
  std::filesystem::path tmp = file_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& [k, v] : entries_) out << k << '\t' << v << '\n';
  }
  std::filesystem::rename(tmp, file_);
}

std::string CountCache::key_plain(const RegionSpec& region) {
  std::ostringstream os;
  os << "v1:count:" << region.degree << ':' << region.dim << ':' << region.threshold;
  return os.str();
}

std::string CountCache::key_scaled(const RegionSpec& region, const ScaleVector& t) {
  std::string key = key_plain(region) + ":t=";
  for (std::size_t k = 0; k < t.t.size(); ++k) {
    if (k) key += ',';
    key += t.t[k].str();
  }
  return key;
}

std::string CountCache::key_divisibility(const RegionSpec& region, std::span<const u64> mu) {
  std::string key = key_plain(region) + ":mu=";
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (k) key += ',';
    key += std::to_string(mu[k]);
  }
  return key;
}

std::string CountCache::key_constrained(const RegionSpec& region, u128 cap_floor) {
  return key_plain(region) + ":cap=" + to_decimal(cap_floor);
}

}  // namespace hyperlat::counting
