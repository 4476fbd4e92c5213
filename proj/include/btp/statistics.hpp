#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace btp {

/// Monte Carlo value with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Pairwise (tree) summation: the result depends only on the order of `xs`,
/// never on how the samples were produced.
double pairwise_sum(std::span<const double> xs);

double mean(std::span<const double> xs);

/// Sample mean with stderr = sample standard deviation / sqrt(n).
/// n = 1 yields stderr 0; an empty sample is invalid input.
Estimate estimate_mean(std::span<const double> xs);

/// Paired estimator of E[a - b].
Estimate estimate_paired_difference(std::span<const double> a, std::span<const double> b);

struct ZTest {
  double z = 0.0;
  bool pass = false;
};

/// z = (value - theoretical) / stderr, pass iff |z| <= threshold.
/// A zero stderr is allowed only when value == theoretical.
ZTest summarize(const Estimate& e, double theoretical, double threshold = 3.0);

/// Two-sided survival function of the Kolmogorov distribution,
/// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value (Stephens'
/// small-sample correction to the effective size).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Ordinary least squares y = intercept + slope * x with standard errors
/// propagated from per-point standard deviations `sigma` (weighted fit).
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_stderr = 0.0;
  double slope_stderr = 0.0;
};

LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma);

}  // namespace btp
