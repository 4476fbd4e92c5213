#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "btp/random.hpp"
#include "btp/statistics.hpp"

namespace btp {

/// Settings shared by the composed-process samplers below. The inner clock
/// is a Brownian motion on a uniform grid of `inner_steps` steps; the outer
/// copies are Brownian motions from `x0` observed exactly at the clock values
/// they are read at.
struct CompositionSampling {
  std::size_t inner_steps = 100;
  double x0 = 0.0;
};

/// Terminal values at time t of n independent kEBTP paths (k copies).
std::vector<double> sample_kebtp_terminal(std::size_t k, double t, std::size_t n, Seed seed,
                                          const CompositionSampling& sampling = {});

/// Terminal values at time t of n independent BTP paths.
std::vector<double> sample_btp_terminal(double t, std::size_t n, Seed seed,
                                        const CompositionSampling& sampling = {});

/// Two-sample KS test of kEBTP against BTP terminal values at time t.
KsResult marginal_match_test(std::size_t k, double t, std::size_t n, Seed seed,
                             const CompositionSampling& sampling = {});

/// Pairs (X(s), X(t)) from n independent paths. k == 0 selects EBTP (a fresh
/// copy per excursion), k >= 1 kEBTP. The inner grid is uniform on [0, t]
/// and contains s as a node.
std::vector<std::pair<double, double>> sample_two_time(std::size_t k, double s, double t,
                                                       std::size_t n, Seed seed,
                                                       const CompositionSampling& sampling = {});

struct JointDistance {
  double distance = 0.0;
  double bootstrap_stderr = 0.0;
};

/// max over a 20 x 20 grid of pooled marginal quantiles (levels i/21) of
/// |F_a(q_i, r_j) - F_b(q_i, r_j)|, with a bootstrap standard error from
/// resampling both sets.
JointDistance bivariate_cdf_distance(const std::vector<std::pair<double, double>>& a,
                                     const std::vector<std::pair<double, double>>& b,
                                     std::size_t bootstrap, Seed seed);

/// Distance between kEBTP and EBTP two-time laws at times (s, t).
JointDistance joint_law_distance(std::size_t k, std::pair<double, double> times, std::size_t n,
                                 Seed seed, std::size_t bootstrap = 100,
                                 const CompositionSampling& sampling = {});

/// Distance between two independent EBTP samples: the noise floor.
JointDistance ebtp_self_distance(std::pair<double, double> times, std::size_t n, Seed seed,
                                 std::size_t bootstrap = 100,
                                 const CompositionSampling& sampling = {});

struct ScalingReport {
  double p = 0.0;
  std::vector<double> lags;
  std::vector<Estimate> moments;
  std::vector<double> log_moments;
  double slope = 0.0;
  double slope_stderr = 0.0;
};

/// E|X(1) - X(1 + lag)|^p of Brownian-time Brownian motion for each lag
/// (decreasing, in (0, 0.5], at least 3), and the weighted slope of log moment
/// against log lag.
ScalingReport holder_scaling(double p, const std::vector<double>& lags, std::size_t n, Seed seed);

}  // namespace btp
