#include "btp/kernels.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "btp/errors.hpp"

namespace btp {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2 pi)

double std_normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

}  // namespace

double heat_kernel(double s, double t, std::span<const double> x, std::span<const double> y) {
  if (!(t > s)) throw InvalidInput("heat_kernel: requires t > s");
  if (x.size() != y.size() || x.empty()) throw InvalidInput("heat_kernel: dimension mismatch");
  const double v = t - s;
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
  const double d = static_cast<double>(x.size());
  return std::pow(2.0 * std::numbers::pi * v, -0.5 * d) * std::exp(-0.5 * r2 / v);
}

double heat_kernel(double s, double t, double x, double y) {
  if (!(t > s)) throw InvalidInput("heat_kernel: requires t > s");
  const double v = t - s;
  return kInvSqrt2Pi / std::sqrt(v) * std::exp(-0.5 * (x - y) * (x - y) / v);
}

double reflected_kernel(double s, double t, double y, double z) {
  if (!(t > s)) throw InvalidInput("reflected_kernel: requires t > s");
  if (y < 0.0 || z < 0.0) throw InvalidInput("reflected_kernel: arguments must be non-negative");
  const double v = t - s;
  return kInvSqrt2Pi / std::sqrt(v) *
         (std::exp(-0.5 * (y - z) * (y - z) / v) + std::exp(-0.5 * (y + z) * (y + z) / v));
}

double gauss_semigroup(const TestFunction& f, double s, std::span<const double> x,
                       const QuadratureSettings& settings) {
  settings.validate();
  if (!(s >= 0.0)) throw InvalidInput("gauss_semigroup: time must be non-negative");
  if (x.size() != f.dim) throw InvalidInput("gauss_semigroup: point dimension mismatch");
  if (s == 0.0) return f(x);
  const double R = settings.truncation_radius_multiplier;
  const double scale = std::sqrt(s);
  std::vector<double> y(x.begin(), x.end());

  // Integrates coordinate k with coordinates < k already fixed in y.
  auto level = [&](auto&& self, std::size_t k) -> double {
    auto integrand = [&](double z) {
      y[k] = x[k] + scale * z;
      const double inner = (k + 1 == y.size()) ? f(y) : self(self, k + 1);
      return std_normal_pdf(z) * inner;
    };
    return integrate(integrand, -R, R, settings).value;
  };
  return level(level, 0);
}

double btp_marginal(const TestFunction& f, std::span<const double> x, double t,
                    const QuadratureSettings& settings) {
  settings.validate();
  if (!(t > 0.0)) throw InvalidInput("btp_marginal: time must be positive");
  const double sd = std::sqrt(t);
  auto integrand = [&](double s) {
    return 2.0 * std_normal_pdf(s / sd) / sd * gauss_semigroup(f, s, x, settings);
  };
  return integrate(integrand, 0.0, settings.truncation_radius_multiplier * sd, settings).value;
}

std::vector<double> btp_marginal_grid(const TestFunction& f, std::span<const double> xs,
                                      std::span<const double> ts,
                                      const QuadratureSettings& settings) {
  settings.validate();
  if (f.dim != 1) throw InvalidInput("btp_marginal_grid: one-dimensional f required");
  if (xs.empty() || ts.empty()) throw InvalidInput("btp_marginal_grid: empty grid");
  double t_max = 0.0;
  for (double t : ts) {
    if (!(t > 0.0)) throw InvalidInput("btp_marginal_grid: times must be positive");
    t_max = std::max(t_max, t);
  }
  const std::size_t nx = xs.size(), nt = ts.size();
  const double R = settings.truncation_radius_multiplier;
  std::vector<double> semigroup(nx);
  auto outer = [&](double s, std::span<double> out) {
    const double scale = std::sqrt(s);
    auto inner = [&](double z, std::span<double> values) {
      const double w = std_normal_pdf(z);
      for (std::size_t i = 0; i < nx; ++i) values[i] = w * f(xs[i] + scale * z);
    };
    semigroup = integrate_many(inner, nx, -R, R, settings);
    for (std::size_t j = 0; j < nt; ++j) {
      const double sd = std::sqrt(ts[j]);
      // Beyond R standard deviations of this row the weight is treated as 0.
      const double w = s <= R * sd ? 2.0 * std_normal_pdf(s / sd) / sd : 0.0;
      for (std::size_t i = 0; i < nx; ++i) out[j * nx + i] = w * semigroup[i];
    }
  };
  return integrate_many(outer, nx * nt, 0.0, R * std::sqrt(t_max), settings);
}

}  // namespace btp
