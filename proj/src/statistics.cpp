#include "btp/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "btp/errors.hpp"

namespace btp {

double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kLeaf = 16;
  if (xs.size() <= kLeaf) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidInput("mean: empty sample");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

Estimate estimate_mean(std::span<const double> xs) {
  const double m = mean(xs);
  const std::size_t n = xs.size();
  if (n < 2) return {m, 0.0, n};
  std::vector<double> sq(n);
  std::transform(xs.begin(), xs.end(), sq.begin(), [m](double x) { return (x - m) * (x - m); });
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  return {m, std::sqrt(var / static_cast<double>(n)), n};
}

Estimate estimate_paired_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("paired difference: sample sizes differ");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return estimate_mean(d);
}

ZTest summarize(const Estimate& e, double theoretical, double threshold) {
  if (e.std_error == 0.0) {
    if (e.value != theoretical) {
      throw DegenerateStatistics("summarize: zero standard error but value differs from theory");
    }
    return {0.0, true};
  }
  const double z = (e.value - theoretical) / e.std_error;
  return {z, std::abs(z) <= threshold};
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-transformed series converges fast for small lambda.
    const double y = std::exp(-M_PI * M_PI / (8.0 * lambda * lambda));
    const double c = std::sqrt(2.0 * M_PI) / lambda;
    const double cdf = c * (y + std::pow(y, 9) + std::pow(y, 25) + std::pow(y, 49));
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidInput("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_survival((en + 0.12 + 0.11 / en) * d)};
}

LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma) {
  if (x.size() != y.size() || x.size() != sigma.size()) {
    throw InvalidInput("weighted_line_fit: length mismatch");
  }
  if (x.size() < 2) throw InvalidInput("weighted_line_fit: need at least two points");
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw InvalidInput("weighted_line_fit: sigma must be positive");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    s += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = s * sxx - sx * sx;
  if (det <= 0.0) throw InvalidInput("weighted_line_fit: abscissae are degenerate");
  LineFit fit;
  fit.slope = (s * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  fit.slope_stderr = std::sqrt(s / det);
  fit.intercept_stderr = std::sqrt(sxx / det);
  return fit;
}

}  // namespace btp
