#include "hyperlat/sympoly.hpp"

namespace hyperlat::sympoly {

namespace {

void validate(int degree, std::size_t size) {
  if (degree < 1 || static_cast<std::size_t>(degree) > size) {
    throw std::invalid_argument("elementary symmetric degree out of range");
  }
}

}  // namespace

u128 eval_elem_sym(int degree, std::span<const u64> coords) {
  validate(degree, coords.size());
  std::vector<u128> e(static_cast<std::size_t>(degree) + 1, 0);
  e[0] = 1;
  for (u64 x : coords) {
    if (x == 0) throw std::invalid_argument("coordinates must be positive");
    for (int j = degree; j >= 1; --j) {
      e[j] = checked_add(e[j], checked_mul(e[j - 1], x));
    }
  }
  return e[degree];
}

u128 eval_elem_sym(const SymPolyQuery& query) {
  return eval_elem_sym(query.degree, query.coords);
}

u128 min_value(int degree, int dim) {
  if (degree < 1 || dim < degree) throw std::invalid_argument("min_value needs 1 <= degree <= dim");
  return binomial(static_cast<u64>(dim), static_cast<unsigned>(degree));
}

PrefixCoefficients PrefixCoefficients::start(int degree) {
  if (degree < 1) throw std::invalid_argument("degree must be >= 1");
  PrefixCoefficients pc;
  pc.degree = degree;
  pc.coeffs.assign(static_cast<std::size_t>(degree) + 1, 0);
  pc.coeffs[0] = 1;
  return pc;
}

PrefixCoefficients PrefixCoefficients::of(int degree, std::span<const u64> prefix) {
  PrefixCoefficients pc = start(degree);
  for (u64 x : prefix) pc.extend(x);
  return pc;
}

void PrefixCoefficients::extend(u128 value) {
  if (value == 0) throw std::invalid_argument("prefix values must be positive");
  for (int j = degree; j >= 1; --j) {
    coeffs[j] = checked_add(coeffs[j], checked_mul(coeffs[j - 1], value));
  }
}

u64 next_coord_bound(const PrefixCoefficients& prefix, int remaining_dims, u64 threshold) {
  if (remaining_dims < 1) throw std::invalid_argument("remaining_dims must be >= 1");
  const int degree = prefix.degree;
  const int suffix = remaining_dims - 1;  // coordinates after the one being bounded

  // Minimal constraint value when the next coordinate is v and the suffix is
  // all ones: sum_j c'_j * C(suffix, degree - j), with c' = extend(c, v).
  auto min_with = [&](u128 v) -> std::optional<u128> {
    u128 total = 0;
    for (int j = 0; j <= degree; ++j) {
      u128 cj = prefix.coeffs[j];
      if (j >= 1) {
        auto term = try_mul(prefix.coeffs[j - 1], v);
        if (!term) return std::nullopt;
        u128 sum;
        if (__builtin_add_overflow(cj, *term, &sum)) return std::nullopt;
        cj = sum;
      }
      int need = degree - j;
      if (need > suffix) continue;
      auto contrib = try_mul(cj, binomial(static_cast<u64>(suffix), static_cast<unsigned>(need)));
      if (!contrib) return std::nullopt;
      u128 sum;
      if (__builtin_add_overflow(total, *contrib, &sum)) return std::nullopt;
      total = sum;
    }
    return total;
  };

  auto feasible = [&](u128 v) {
    auto value = min_with(v);
    return value.has_value() && *value <= threshold;
  };

  if (!feasible(1)) return 0;
  u128 lo = 1, step = 1;
  while (feasible(lo + step)) {
    lo += step;
    step *= 2;
  }
  while (step > 0) {
    if (feasible(lo + step)) lo += step;
    step /= 2;
  }
  if (lo > std::numeric_limits<u64>::max()) throw std::overflow_error("next_coord_bound overflow");
  return static_cast<u64>(lo);
}

}  // namespace hyperlat::sympoly
