#include "hyperlat/stats.hpp"

#include <algorithm>
#include <cmath>

namespace hyperlat::stats {

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic on empty sample");
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, f - static_cast<double>(i) / m);
    d = std::max(d, static_cast<double>(i + 1) / m - f);
  }
  return d;
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = 3.141592653589793238462643383279502884;
  if (lambda < 1.18) {
    // dual theta series, rapidly convergent for small lambda
    const double t = std::exp(-pi * pi / (8.0 * lambda * lambda));
    const double p = std::sqrt(2.0 * pi) / lambda *
                     (t + std::pow(t, 9.0) + std::pow(t, 25.0) + std::pow(t, 49.0));
    return std::clamp(1.0 - p, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    double term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double kolmogorov_critical(u64 m, double alpha) {
  double lo = 0.0, hi = 4.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (kolmogorov_q(mid) > alpha ? lo : hi) = mid;
  }
  return hi / std::sqrt(static_cast<double>(m));
}

namespace {

// Lanczos-free: use lgamma from the standard library.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

ChiSquare chi_square(std::span<const u64> observed, std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw std::invalid_argument("chi_square size mismatch");
  }
  ChiSquare out;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) throw std::invalid_argument("chi_square expected count must be positive");
    const double diff = static_cast<double>(observed[i]) - expected[i];
    out.statistic += diff * diff / expected[i];
  }
  out.df = observed.size() - 1;
  out.p_value = gamma_q(static_cast<double>(out.df) / 2.0, out.statistic / 2.0);
  return out;
}

ChiSquare chi_square_two_sample(std::span<const u64> a, std::span<const u64> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("chi_square size mismatch");
  double na = 0.0, nb = 0.0;
  for (u64 v : a) na += static_cast<double>(v);
  for (u64 v : b) nb += static_cast<double>(v);
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("chi_square empty sample");
  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  ChiSquare out;
  u64 used_cells = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double total = static_cast<double>(a[i]) + static_cast<double>(b[i]);
    if (total == 0.0) continue;
    ++used_cells;
    const double diff = ka * static_cast<double>(a[i]) - kb * static_cast<double>(b[i]);
    out.statistic += diff * diff / total;
  }
  if (used_cells < 2) throw std::invalid_argument("chi_square needs at least two populated cells");
  out.df = used_cells - 1;
  out.p_value = gamma_q(static_cast<double>(out.df) / 2.0, out.statistic / 2.0);
  return out;
}

double chi_square_critical(u64 df, double alpha) {
  const double a = static_cast<double>(df) / 2.0;
  double lo = 0.0, hi = std::max(10.0, 4.0 * static_cast<double>(df));
  while (gamma_q(a, hi / 2.0) > alpha) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (gamma_q(a, mid / 2.0) > alpha ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace hyperlat::stats
