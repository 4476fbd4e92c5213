#include "btp/convergence.hpp"

#include <algorithm>
#include <cmath>

#include "btp/composition.hpp"
#include "btp/errors.hpp"
#include "btp/parallel.hpp"
#include "btp/paths.hpp"

namespace btp {
namespace {

constexpr std::size_t kQuantiles = 20;

TimeGrid inner_grid(double s, double t, std::size_t steps) {
  if (steps == 0) throw InvalidInput("inner_steps must be positive");
  std::vector<double> times(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) times[i] = t * static_cast<double>(i) / steps;
  times.back() = t;
  if (s > 0.0 && s < t) times.push_back(s);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return TimeGrid(std::move(times));
}

std::vector<double> clock_values(const Path& inner) {
  std::vector<double> v(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) v[i] = std::abs(inner.scalar(i));
  return v;
}

// One composed path: k == 0 is EBTP, k >= 1 is kEBTP (k == 1 is BTP).
ComposedPath compose_one(std::size_t k, const TimeGrid& grid, double x0, Seed seed) {
  const Path inner = sample_bm(grid, 1, derive(seed, Stream::inner));
  const auto clock = clock_values(inner);
  const TimeGrid outer_grid = TimeGrid::covering(clock);
  const double start = x0;
  const std::span<const double> start_point(&start, 1);
  const Seed outer_seed = derive(seed, Stream::outer);
  if (k == 0) {
    auto factory = [&](Seed s) { return sample_bm(outer_grid, start_point, s); };
    return compose_ebtp(inner, factory, outer_seed);
  }
  std::vector<Path> copies;
  copies.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    copies.push_back(sample_bm(outer_grid, start_point, derive(outer_seed, c)));
  }
  if (k == 1) return compose_btp(inner, copies[0]);
  return compose_kebtp(inner, copies, derive(seed, Stream::labels));
}

std::vector<double> terminal_values(std::size_t k, double t, std::size_t n, Seed seed,
                                    const CompositionSampling& sampling) {
  if (!(t > 0.0)) throw InvalidInput("terminal sample: t must be positive");
  if (n == 0) throw InvalidInput("terminal sample: n must be positive");
  const TimeGrid grid = inner_grid(t, t, sampling.inner_steps);
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) {
    const auto c = compose_one(k, grid, sampling.x0, derive(seed, i));
    out[i] = c.path.scalar(c.path.size() - 1);
  });
  return out;
}

// Cell index of v among sorted thresholds: number of thresholds < v.
std::size_t cell(const std::vector<double>& thresholds, double v) {
  return static_cast<std::size_t>(std::lower_bound(thresholds.begin(), thresholds.end(), v) -
                                  thresholds.begin());
}

double quantile(std::vector<double> v, double level) {
  const double pos = level * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

// CDF on the grid from counts per cell, where cell c = (cx, cy), cx,cy in [0, 20].
std::vector<double> grid_cdf(const std::vector<std::size_t>& cells,
                             const std::vector<std::size_t>& pick) {
  constexpr std::size_t w = kQuantiles + 1;
  std::vector<double> counts(w * w, 0.0);
  for (std::size_t i : pick) counts[cells[i]] += 1.0;
  // cumulative sums over both axes: F(a, b) counts cells with cx <= a, cy <= b
  for (std::size_t a = 0; a < w; ++a)
    for (std::size_t b = 1; b < w; ++b) counts[a * w + b] += counts[a * w + b - 1];
  for (std::size_t a = 1; a < w; ++a)
    for (std::size_t b = 0; b < w; ++b) counts[a * w + b] += counts[(a - 1) * w + b];
  const double n = static_cast<double>(pick.size());
  for (double& c : counts) c /= n;
  return counts;
}

double max_difference(const std::vector<double>& fa, const std::vector<double>& fb) {
  constexpr std::size_t w = kQuantiles + 1;
  double d = 0.0;
  // Only threshold corners (a, b < 20) are compared.
  for (std::size_t a = 0; a < kQuantiles; ++a)
    for (std::size_t b = 0; b < kQuantiles; ++b)
      d = std::max(d, std::abs(fa[a * w + b] - fb[a * w + b]));
  return d;
}

}  // namespace

std::vector<double> sample_kebtp_terminal(std::size_t k, double t, std::size_t n, Seed seed,
                                          const CompositionSampling& sampling) {
  if (k == 0) throw InvalidInput("sample_kebtp_terminal: k must be positive");
  return terminal_values(k, t, n, seed, sampling);
}

std::vector<double> sample_btp_terminal(double t, std::size_t n, Seed seed,
                                        const CompositionSampling& sampling) {
  return terminal_values(1, t, n, seed, sampling);
}

KsResult marginal_match_test(std::size_t k, double t, std::size_t n, Seed seed,
                             const CompositionSampling& sampling) {
  if (k == 0) throw InvalidInput("marginal_match_test: k must be positive");
  auto a = sample_kebtp_terminal(k, t, n, derive(seed, 0), sampling);
  auto b = sample_btp_terminal(t, n, derive(seed, 1), sampling);
  return ks_two_sample(std::move(a), std::move(b));
}

std::vector<std::pair<double, double>> sample_two_time(std::size_t k, double s, double t,
                                                       std::size_t n, Seed seed,
                                                       const CompositionSampling& sampling) {
  if (!(s > 0.0) || !(s < t)) throw InvalidInput("sample_two_time: requires 0 < s < t");
  if (n == 0) throw InvalidInput("sample_two_time: n must be positive");
  const TimeGrid grid = inner_grid(s, t, sampling.inner_steps);
  const std::size_t is = grid.locate(s);
  std::vector<std::pair<double, double>> out(n);
  parallel_for(n, [&](std::size_t i) {
    const auto c = compose_one(k, grid, sampling.x0, derive(seed, i));
    out[i] = {c.path.scalar(is), c.path.scalar(c.path.size() - 1)};
  });
  return out;
}

JointDistance bivariate_cdf_distance(const std::vector<std::pair<double, double>>& a,
                                     const std::vector<std::pair<double, double>>& b,
                                     std::size_t bootstrap, Seed seed) {
  if (a.size() < 2 || b.size() < 2) throw InvalidInput("bivariate_cdf_distance: samples too small");
  std::vector<double> xs, ys;
  xs.reserve(a.size() + b.size());
  ys.reserve(a.size() + b.size());
  for (const auto* set : {&a, &b}) {
    for (const auto& [x, y] : *set) {
      xs.push_back(x);
      ys.push_back(y);
    }
  }
  std::vector<double> qx(kQuantiles), qy(kQuantiles);
  for (std::size_t i = 0; i < kQuantiles; ++i) {
    const double level = static_cast<double>(i + 1) / (kQuantiles + 1);
    qx[i] = quantile(xs, level);
    qy[i] = quantile(ys, level);
  }
  // Cell index: samples in cell (cx, cy) satisfy X <= q_x[a] iff cx <= a.
  auto cells_of = [&](const std::vector<std::pair<double, double>>& set) {
    std::vector<std::size_t> c(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
      c[i] = cell(qx, set[i].first) * (kQuantiles + 1) + cell(qy, set[i].second);
    }
    return c;
  };
  const auto ca = cells_of(a), cb = cells_of(b);
  std::vector<std::size_t> ia(a.size()), ib(b.size());
  for (std::size_t i = 0; i < ia.size(); ++i) ia[i] = i;
  for (std::size_t i = 0; i < ib.size(); ++i) ib[i] = i;
  JointDistance out;
  out.distance = max_difference(grid_cdf(ca, ia), grid_cdf(cb, ib));
  if (bootstrap >= 2) {
    Rng rng(derive(seed, Stream::bootstrap));
    std::vector<double> reps(bootstrap);
    for (std::size_t r = 0; r < bootstrap; ++r) {
      for (auto& i : ia) i = rng.below(a.size());
      for (auto& i : ib) i = rng.below(b.size());
      reps[r] = max_difference(grid_cdf(ca, ia), grid_cdf(cb, ib));
    }
    const Estimate e = estimate_mean(reps);
    out.bootstrap_stderr = e.std_error * std::sqrt(static_cast<double>(bootstrap));
  }
  return out;
}

JointDistance joint_law_distance(std::size_t k, std::pair<double, double> times, std::size_t n,
                                 Seed seed, std::size_t bootstrap,
                                 const CompositionSampling& sampling) {
  if (k == 0) throw InvalidInput("joint_law_distance: k must be positive");
  const auto a = sample_two_time(k, times.first, times.second, n, derive(seed, 0), sampling);
  const auto b = sample_two_time(0, times.first, times.second, n, derive(seed, 1), sampling);
  return bivariate_cdf_distance(a, b, bootstrap, derive(seed, 2));
}

JointDistance ebtp_self_distance(std::pair<double, double> times, std::size_t n, Seed seed,
                                 std::size_t bootstrap, const CompositionSampling& sampling) {
  const auto a = sample_two_time(0, times.first, times.second, n, derive(seed, 0), sampling);
  const auto b = sample_two_time(0, times.first, times.second, n, derive(seed, 1), sampling);
  return bivariate_cdf_distance(a, b, bootstrap, derive(seed, 2));
}

ScalingReport holder_scaling(double p, const std::vector<double>& lags, std::size_t n, Seed seed) {
  if (!(p > 0.0)) throw InvalidInput("holder_scaling: p must be positive");
  if (lags.size() < 3) throw InvalidInput("holder_scaling: at least 3 lags are required");
  if (n < 2) throw InvalidInput("holder_scaling: n must be at least 2");
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (!(lags[i] > 0.0) || lags[i] > 0.5) throw InvalidInput("holder_scaling: lags must lie in (0, 0.5]");
    if (i > 0 && !(lags[i] < lags[i - 1])) {
      throw InvalidInput("holder_scaling: lags must be strictly decreasing");
    }
  }
  ScalingReport r;
  r.p = p;
  r.lags = lags;
  std::vector<double> log_lag, sigma;
  for (std::size_t l = 0; l < lags.size(); ++l) {
    const TimeGrid grid({0.0, 1.0, 1.0 + lags[l]});
    std::vector<double> values(n);
    const Seed lag_seed = derive(seed, l);
    parallel_for(n, [&](std::size_t i) {
      const auto c = compose_one(1, grid, 0.0, derive(lag_seed, i));
      values[i] = std::pow(std::abs(c.path.scalar(2) - c.path.scalar(1)), p);
    });
    const Estimate e = estimate_mean(values);
    if (!(e.value > 0.0) || !(e.std_error > 0.0)) {
      throw DegenerateStatistics("holder_scaling: degenerate moment estimate");
    }
    r.moments.push_back(e);
    r.log_moments.push_back(std::log(e.value));
    log_lag.push_back(std::log(lags[l]));
    sigma.push_back(e.std_error / e.value);
  }
  const LineFit fit = weighted_line_fit(log_lag, r.log_moments, sigma);
  r.slope = fit.slope;
  r.slope_stderr = fit.slope_stderr;
  return r;
}

}  // namespace btp
