#pragma once

#include <cstddef>
#include <vector>

#include "btp/quadrature.hpp"
#include "btp/random.hpp"
#include "btp/statistics.hpp"
#include "btp/test_function.hpp"

namespace btp {

/// Observation X(|B(s)|) = xi of a Brownian-time Brownian motion started at
/// x0, and the function whose half-derivative generator is wanted.
struct HalfGenQuery {
  double s = 1.0;
  double xi = 0.0;
  double x0 = 0.0;
  TestFunction f;
};

/// Generator of Brownian motion from x0 run backwards from time y:
/// f''(xi)/2 + ((x0 - xi)/y) f'(xi).
double reversed_generator(const TestFunction& f, double y, double xi, double x0);

/// (1/sqrt(2 pi)) [f''(xi)/2 + N/D], where N/D averages the reversed
/// generator over the clock value y with weight p(0,s;0,y) h(0,y;x0,xi)
/// (reflected and Gaussian kernels). At xi == x0 the drift part is exactly 0.
double halfgen_quadrature(const HalfGenQuery& q, const QuadratureSettings& settings = {});

struct HalfGenMcOptions {
  /// Replicate streams per delta; the bootstrap resamples whole streams.
  std::size_t groups = 100;
  std::size_t bootstrap = 400;
  /// Integrate the outer increment exactly given both clock values (Gauss-Hermite).
  /// When false the increment is sampled.
  bool integrate_outer_increment = true;
  std::size_t hermite_nodes = 20;
};

struct HalfGenMcResult {
  Estimate estimate;  // extrapolated value, bootstrap standard error
  std::vector<double> deltas;
  std::vector<double> quotients;          // kernel-regression quotient per delta
  std::vector<double> quotient_stderr;
  std::vector<double> effective_samples;  // Kish effective size in the kernel window
};

/// Kernel-regression estimate of E[f(X(t)) - f(X(s)) | X(s) = xi] / sqrt(t - s)
/// for each t = s + delta, extrapolated to delta -> 0 by weighted least squares
/// on 1, delta^(1/4), delta^(1/2). Needs at least 3 decreasing deltas; fewer
/// than 100 effective samples at any delta is InsufficientData.
HalfGenMcResult halfgen_mc(const HalfGenQuery& q, const std::vector<double>& deltas, std::size_t n,
                           double bandwidth, Seed seed, const HalfGenMcOptions& options = {});

}  // namespace btp
