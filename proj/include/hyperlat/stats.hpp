#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hyperlat/base.hpp"

namespace hyperlat::stats {

// sup_x |F_m(x) - F(x)| for the empirical CDF of the samples against a
// reference CDF. Sorts a copy of the samples.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);
// Critical KS distance for sample size m at significance alpha (asymptotic).
double kolmogorov_critical(u64 m, double alpha);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

struct ChiSquare {
  double statistic = 0.0;
  double p_value = 1.0;
  u64 df = 0;
};

// One-sample test: expected[] are counts (same total as observed).
ChiSquare chi_square(std::span<const u64> observed, std::span<const double> expected);
// Two-sample test on a shared binning.
ChiSquare chi_square_two_sample(std::span<const u64> a, std::span<const u64> b);
// Critical statistic value at significance alpha for df degrees of freedom.
double chi_square_critical(u64 df, double alpha);

}  // namespace hyperlat::stats
