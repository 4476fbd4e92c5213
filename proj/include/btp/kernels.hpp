#pragma once

#include <span>
#include <vector>

#include "btp/quadrature.hpp"
#include "btp/test_function.hpp"

namespace btp {

/// Gaussian transition density of Brownian motion from x at time s to y at
/// time t: variance (t - s) per coordinate.
double heat_kernel(double s, double t, std::span<const double> x, std::span<const double> y);
double heat_kernel(double s, double t, double x, double y);

/// Transition density of reflected Brownian motion |B| on [0, inf):
/// (2 pi (t-s))^{-1/2} [exp(-(y-z)^2 / 2(t-s)) + exp(-(y+z)^2 / 2(t-s))].
double reflected_kernel(double s, double t, double y, double z);

/// E f(x + W(s)) for a standard Brownian motion W, by nested adaptive
/// quadrature over [-R, R]^d in standard-normal coordinates.
double gauss_semigroup(const TestFunction& f, double s, std::span<const double> x,
                       const QuadratureSettings& settings = {});

/// E f(X^x(|B(t)|)) for Brownian X, computed as
///   2 * int_0^inf p_t(0, s) E f(x + W(s)) ds
/// with p_t(0, .) the N(0, t) density, truncated at R * sqrt(t).
double btp_marginal(const TestFunction& f, std::span<const double> x, double t,
                    const QuadratureSettings& settings = {});

/// btp_marginal at every node (ts[j], xs[i]) of a one-dimensional grid,
/// returned time-major (index j * xs.size() + i). The s- and z-partitions are
/// shared by all nodes, so the quadrature error varies smoothly across the
/// grid and survives finite differencing; each E f(x + W(s)) is computed once
/// for all times.
std::vector<double> btp_marginal_grid(const TestFunction& f, std::span<const double> xs,
                                      std::span<const double> ts,
                                      const QuadratureSettings& settings = {});

}  // namespace btp
