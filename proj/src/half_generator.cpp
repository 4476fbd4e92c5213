#include "btp/half_generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/hermite.hpp>

#include "btp/errors.hpp"
#include "btp/kernels.hpp"
#include "btp/parallel.hpp"

namespace btp {
namespace {

double first_derivative(const TestFunction& f, double x) {
  return f.gradient(std::span<const double>(&x, 1))[0];
}

double second_derivative(const TestFunction& f, double x) {
  return f.hessian(std::span<const double>(&x, 1))[0];
}

void require_query(const HalfGenQuery& q, const char* who) {
  if (!(q.s > 0.0)) throw InvalidInput(std::string(who) + ": s must be positive");
  if (!std::isfinite(q.xi) || !std::isfinite(q.x0)) {
    throw InvalidInput(std::string(who) + ": xi and x0 must be finite");
  }
  if (q.f.dim != 1 || !q.f.value || !q.f.gradient || !q.f.hessian) {
    throw InvalidInput(std::string(who) + ": one-dimensional f with derivatives required");
  }
}

// Gauss-Hermite rule for E g(Z), Z standard normal (probabilists' weights).
struct HermiteRule {
  std::vector<double> nodes, weights;
};

HermiteRule hermite_rule(std::size_t m) {
  if (m < 2 || m > 60) throw InvalidInput("halfgen_mc: hermite_nodes must lie in [2, 60]");
  // Roots of the physicists' H_m by Newton from the standard asymptotic guesses.
  std::vector<double> x(m), w(m);
  const double md = static_cast<double>(m);
  for (std::size_t i = 0; i < (m + 1) / 2; ++i) {
    double z;
    if (i == 0) {
      z = std::sqrt(2.0 * md + 1.0) - 1.85575 * std::pow(2.0 * md + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z = x[0] - 1.14 * std::pow(md, 0.426) / x[0];
    } else if (i == 2) {
      z = 1.86 * x[1] - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * x[2] - 0.91 * x[1];
    } else {
      z = 2.0 * x[i - 1] - x[i - 2];
    }
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = boost::math::hermite(static_cast<unsigned>(m), z);
      dp = 2.0 * md * boost::math::hermite(static_cast<unsigned>(m - 1), z);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    dp = 2.0 * md * boost::math::hermite(static_cast<unsigned>(m - 1), z);
    // Physicists' weight 2^(m+1) m! sqrt(pi) / H'_m(z)^2, computed in logs.
    const double log_w = (md + 1.0) * std::log(2.0) + std::lgamma(md + 1.0) +
                         0.5 * std::log(std::numbers::pi) - 2.0 * std::log(std::abs(dp));
    x[i] = z;
    x[m - 1 - i] = -z;
    w[i] = w[m - 1 - i] = std::exp(log_w);
  }
  HermiteRule r;
  for (std::size_t i = 0; i < m; ++i) {
    r.nodes.push_back(std::numbers::sqrt2 * x[i]);
    r.weights.push_back(w[i] / std::sqrt(std::numbers::pi));
  }
  return r;
}

struct GroupSums {
  double k = 0.0, kd = 0.0, k2 = 0.0;
};

// Weighted least squares of y on (1, delta^(1/4), delta^(1/2)); returns the intercept.
double extrapolate(const std::vector<double>& deltas, const std::vector<double>& y,
                   const std::vector<double>& w) {
  std::array<std::array<double, 4>, 3> a{};
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const std::array<double, 3> basis{1.0, std::pow(deltas[i], 0.25), std::sqrt(deltas[i])};
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) a[r][c] += w[i] * basis[r] * basis[c];
      a[r][3] += w[i] * basis[r] * y[i];
    }
  }
  // Gaussian elimination with partial pivoting.
  for (std::size_t col = 0; col < 3; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 3; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    if (a[col][col] == 0.0) throw DegenerateStatistics("halfgen_mc: singular extrapolation fit");
    for (std::size_t r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < 4; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  return a[0][3] / a[0][0];
}

}  // namespace

double reversed_generator(const TestFunction& f, double y, double xi, double x0) {
  if (!(y > 0.0)) throw InvalidInput("reversed_generator: y must be positive");
  const double drift = (x0 - xi) / y;
  const double f2 = second_derivative(f, xi);
  return drift == 0.0 ? 0.5 * f2 : 0.5 * f2 + drift * first_derivative(f, xi);
}

double halfgen_quadrature(const HalfGenQuery& q, const QuadratureSettings& settings) {
  require_query(q, "halfgen_quadrature");
  settings.validate();
  const double half_f2 = 0.5 * second_derivative(q.f, q.xi);
  double average = half_f2;
  if (q.xi != q.x0) {
    // Substituting y = w^2 removes the y^(-1/2) behaviour of h near 0.
    const double w_max = std::sqrt(settings.truncation_radius_multiplier * std::sqrt(q.s));
    auto weight = [&](double w) {
      const double y = w * w;
      return reflected_kernel(0.0, q.s, 0.0, y) * heat_kernel(0.0, y, q.x0, q.xi) * 2.0 * w;
    };
    const double d = integrate(weight, 0.0, w_max, settings).value;
    if (!(d > 0.0)) {
      throw NumericalDomainError("halfgen_quadrature: posterior normaliser underflowed");
    }
    const double inv_y = integrate([&](double w) { return weight(w) / (w * w); }, 0.0, w_max,
                                   settings).value;
    average = half_f2 + (q.x0 - q.xi) * first_derivative(q.f, q.xi) * inv_y / d;
  }
  return (half_f2 + average) / std::sqrt(2.0 * std::numbers::pi);
}

HalfGenMcResult halfgen_mc(const HalfGenQuery& q, const std::vector<double>& deltas, std::size_t n,
                           double bandwidth, Seed seed, const HalfGenMcOptions& options) {
  require_query(q, "halfgen_mc");
  if (deltas.size() < 3) throw InvalidInput("halfgen_mc: at least 3 deltas are required");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0) || !(deltas[i] < q.s)) {
      throw InvalidInput("halfgen_mc: deltas must lie in (0, s)");
    }
    if (i > 0 && !(deltas[i] < deltas[i - 1])) {
      throw InvalidInput("halfgen_mc: deltas must be strictly decreasing");
    }
  }
  if (!(bandwidth > 0.0)) throw InvalidInput("halfgen_mc: bandwidth must be positive");
  const std::size_t groups = options.groups;
  if (groups < 2) throw InvalidInput("halfgen_mc: at least 2 groups are required");
  if (n < groups) throw InvalidInput("halfgen_mc: n must be at least the number of groups");
  const HermiteRule rule = hermite_rule(options.hermite_nodes);
  const double window = 8.0 * bandwidth;  // kernel weight below 1.3e-14 outside
  const double sqrt_s = std::sqrt(q.s);
  const TestFunction& f = q.f;

  const std::size_t nd = deltas.size();
  std::vector<GroupSums> sums(nd * groups);
  parallel_for(nd * groups, [&](std::size_t job) {
    const std::size_t di = job / groups, g = job % groups;
    const double delta = deltas[di];
    const double sqrt_delta = std::sqrt(delta);
    const std::size_t count = n * (g + 1) / groups - n * g / groups;
    Rng rng(derive(derive(seed, di), g));
    GroupSums acc;
    for (std::size_t r = 0; r < count; ++r) {
      const double b = sqrt_s * rng.gaussian();
      const double y = std::abs(b);
      const double xs = q.x0 + std::sqrt(y) * rng.gaussian();
      const double z = std::abs(b + sqrt_delta * rng.gaussian());
      const double noise = options.integrate_outer_increment ? 0.0 : rng.gaussian();
      const double u = (xs - q.xi) / bandwidth;
      if (std::abs(xs - q.xi) >= window) continue;
      // Law of X(z) given X(0) = x0 and X(y) = xs: forward motion or bridge.
      double mean, var;
      if (z >= y) {
        mean = xs;
        var = z - y;
      } else {
        mean = q.x0 + (xs - q.x0) * z / y;
        var = std::max(0.0, z * (y - z) / y);
      }
      const double sd = std::sqrt(var);
      double ef;
      if (options.integrate_outer_increment) {
        ef = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
          ef += rule.weights[k] * f(mean + sd * rule.nodes[k]);
        }
      } else {
        ef = f(mean + sd * noise);
      }
      const double quotient = (ef - f(xs)) / sqrt_delta;
      const double kw = std::exp(-0.5 * u * u);
      acc.k += kw;
      acc.kd += kw * quotient;
      acc.k2 += kw * kw;
    }
    sums[job] = acc;
  });

  HalfGenMcResult result;
  result.deltas = deltas;
  const double gd = static_cast<double>(groups);
  for (std::size_t di = 0; di < nd; ++di) {
    std::vector<double> k(groups), kd(groups), k2(groups);
    for (std::size_t g = 0; g < groups; ++g) {
      k[g] = sums[di * groups + g].k;
      kd[g] = sums[di * groups + g].kd;
      k2[g] = sums[di * groups + g].k2;
    }
    const double sk = pairwise_sum(k), skd = pairwise_sum(kd), sk2 = pairwise_sum(k2);
    const double ess = sk2 > 0.0 ? sk * sk / sk2 : 0.0;
    if (ess < 100.0) {
      throw InsufficientData("halfgen_mc: only " + std::to_string(ess) +
                             " effective samples in the kernel window at delta = " +
                             std::to_string(deltas[di]));
    }
    const double m = skd / sk;
    std::vector<double> resid(groups);
    for (std::size_t g = 0; g < groups; ++g) {
      const double e = kd[g] - m * k[g];
      resid[g] = e * e;
    }
    result.quotients.push_back(m);
    result.quotient_stderr.push_back(std::sqrt(gd / (gd - 1.0) * pairwise_sum(resid)) / sk);
    result.effective_samples.push_back(ess);
  }

  std::vector<double> weights(nd, 1.0);
  if (std::all_of(result.quotient_stderr.begin(), result.quotient_stderr.end(),
                  [](double s) { return s > 0.0; })) {
    for (std::size_t di = 0; di < nd; ++di) {
      weights[di] = 1.0 / (result.quotient_stderr[di] * result.quotient_stderr[di]);
    }
  }
  const double value = extrapolate(deltas, result.quotients, weights);

  Rng boot(derive(seed, Stream::bootstrap));
  std::vector<double> replicate(options.bootstrap), y(nd);
  for (std::size_t b = 0; b < options.bootstrap; ++b) {
    for (std::size_t di = 0; di < nd; ++di) {
      double sk = 0.0, skd = 0.0;
      for (std::size_t g = 0; g < groups; ++g) {
        const auto& s = sums[di * groups + boot.below(groups)];
        sk += s.k;
        skd += s.kd;
      }
      y[di] = sk > 0.0 ? skd / sk : result.quotients[di];
    }
    replicate[b] = extrapolate(deltas, y, weights);
  }
  const Estimate spread = estimate_mean(replicate);
  const double boot_sd = spread.std_error * std::sqrt(static_cast<double>(replicate.size()));
  result.estimate = {value, options.bootstrap >= 2 ? boot_sd : 0.0, n * nd};
  return result;
}

}  // namespace btp
