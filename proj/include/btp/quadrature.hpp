#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "btp/errors.hpp"

namespace btp {

struct QuadratureSettings {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  std::size_t max_subdivisions = 4000;
  /// Gaussian-dominated integrals are truncated this many standard deviations
  /// from their centre.
  double truncation_radius_multiplier = 10.0;

  /// Throws InvalidInput on non-positive tolerances or a multiplier below 6.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t subdivisions = 0;
};

namespace detail {

// 15-point Kronrod abscissae on [0, 1] (index 0 is the centre); the embedded
// 7-point Gauss rule uses the even indices.
struct KronrodRule {
  std::array<double, 8> nodes;
  std::array<double, 8> kronrod_weights;
  std::array<double, 4> gauss_weights;
};

const KronrodRule& kronrod15();

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment apply_rule(F& f, double a, double b) {
  const auto& r = kronrod15();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = r.kronrod_weights[0] * fc;
  double g = r.gauss_weights[0] * fc;
  for (std::size_t i = 1; i < 8; ++i) {
    const double sum = f(c - h * r.nodes[i]) + f(c + h * r.nodes[i]);
    k += r.kronrod_weights[i] * sum;
    if (i % 2 == 0) g += r.gauss_weights[i / 2] * sum;
  }
  if (!std::isfinite(k)) throw NumericalDomainError("integrate: integrand is not finite");
  return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b]:
/// the segment with the largest error estimate is bisected until the total
/// estimate is below max(abs_tol, rel_tol * |value|). Throws AccuracyError,
/// carrying the achieved error, when max_subdivisions is reached first.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSettings& s) {
  if (a == b) return {};
  if (b < a) {
    auto r = integrate(f, b, a, s);
    r.value = -r.value;
    return r;
  }
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::apply_rule(f, a, b));
  double value = heap.top().value;
  double error = heap.top().error;
  std::size_t segments = 1;
  while (error > std::max(s.abs_tol, s.rel_tol * std::abs(value))) {
    if (segments >= s.max_subdivisions) {
      throw AccuracyError("integrate: tolerance not met within " +
                              std::to_string(s.max_subdivisions) + " subdivisions (achieved " +
                              std::to_string(error) + ")",
                          error, std::max(s.abs_tol, s.rel_tol * std::abs(value)));
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw AccuracyError("integrate: segment cannot be split further", error, s.abs_tol);
    }
    const auto left = detail::apply_rule(f, worst.a, mid);
    const auto right = detail::apply_rule(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }
  // Re-add from scratch: the running sums above accumulate cancellation error.
  double total = 0.0, total_error = 0.0;
  std::vector<detail::Segment> parts;
  parts.reserve(heap.size());
  while (!heap.empty()) {
    parts.push_back(heap.top());
    heap.pop();
  }
  std::sort(parts.begin(), parts.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  for (const auto& p : parts) {
    total += p.value;
    total_error += p.error;
  }
  return {total, total_error, segments};
}

/// Vector-valued version of integrate: f(x, out) fills out[0..m). One
/// partition serves all components; a segment is split while the largest
/// component error estimate exceeds the tolerance, which is taken relative
/// to the largest component value. Sharing the partition makes the error a
/// smooth function of whatever parameter distinguishes the components.
template <class F>
std::vector<double> integrate_many(F&& f, std::size_t m, double a, double b,
                                   const QuadratureSettings& s) {
  struct Part {
    double a, b, error;
    std::vector<double> value;
    bool operator<(const Part& o) const { return error < o.error; }
  };
  const auto& r = detail::kronrod15();
  std::vector<double> fx(m), k(m), g(m);
  auto rule = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    std::fill(k.begin(), k.end(), 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    auto add = [&](double x, double wk, double wg) {
      f(x, std::span<double>(fx));
      for (std::size_t i = 0; i < m; ++i) {
        k[i] += wk * fx[i];
        g[i] += wg * fx[i];
      }
    };
    add(c, r.kronrod_weights[0], r.gauss_weights[0]);
    for (std::size_t j = 1; j < 8; ++j) {
      const double wg = j % 2 == 0 ? r.gauss_weights[j / 2] : 0.0;
      add(c - h * r.nodes[j], r.kronrod_weights[j], wg);
      add(c + h * r.nodes[j], r.kronrod_weights[j], wg);
    }
    Part p{lo, hi, 0.0, std::vector<double>(m)};
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(k[i])) throw NumericalDomainError("integrate_many: integrand is not finite");
      p.value[i] = k[i] * h;
      p.error = std::max(p.error, std::abs((k[i] - g[i]) * h));
    }
    return p;
  };
  std::vector<double> total(m, 0.0);
  if (a == b || m == 0) return total;
  if (b < a) {
    auto v = integrate_many(f, m, b, a, s);
    for (double& x : v) x = -x;
    return v;
  }
  std::priority_queue<Part> heap;
  heap.push(rule(a, b));
  double error = heap.top().error;
  total = heap.top().value;
  std::size_t segments = 1;
  auto scale = [&] {
    double mx = 0.0;
    for (double v : total) mx = std::max(mx, std::abs(v));
    return std::max(s.abs_tol, s.rel_tol * mx);
  };
  while (error > scale()) {
    if (segments >= s.max_subdivisions) {
      throw AccuracyError("integrate_many: tolerance not met within " +
                              std::to_string(s.max_subdivisions) + " subdivisions",
                          error, scale());
    }
    Part worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw AccuracyError("integrate_many: segment cannot be split further", error, scale());
    }
    Part left = rule(worst.a, mid);
    Part right = rule(mid, worst.b);
    for (std::size_t i = 0; i < m; ++i) {
      total[i] += left.value[i] + right.value[i] - worst.value[i];
    }
    error += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++segments;
  }
  std::vector<Part> parts;
  parts.reserve(heap.size());
  while (!heap.empty()) {
    parts.push_back(heap.top());
    heap.pop();
  }
  std::sort(parts.begin(), parts.end(), [](const Part& x, const Part& y) { return x.a < y.a; });
  std::fill(total.begin(), total.end(), 0.0);
  for (const auto& p : parts)
    for (std::size_t i = 0; i < m; ++i) total[i] += p.value[i];
  return total;
}

}  // namespace btp
