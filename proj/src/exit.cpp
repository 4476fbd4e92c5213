#include "btp/exit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "btp/errors.hpp"
#include "btp/kernels.hpp"
#include "btp/parallel.hpp"

namespace btp {
namespace {

struct Hit {
  double time = 0.0;
  Point point;
};

// Locates a crossing known to happen during [t, t + dt] between the interior
// point a and the point b by bisecting with Brownian-bridge midpoints.
Hit localise(const Domain& domain, Point a, Point b, double t, double dt, int levels, Rng& rng) {
  const std::size_t d = a.size();
  Point m(d);
  constexpr int kMaxTrials = 100000;
  for (int level = 0; level < levels; ++level) {
    const double half = 0.5 * dt;
    const double sd = std::sqrt(0.25 * dt);
    bool b_outside = !domain.contains(b);
    int trial = 0;
    for (; trial < kMaxTrials; ++trial) {
      for (std::size_t i = 0; i < d; ++i) m[i] = 0.5 * (a[i] + b[i]) + sd * rng.gaussian();
      if (!domain.contains(m) || rng.uniform() < domain.crossing_probability(a, m, half)) {
        b = m;
        break;
      }
      if (b_outside || rng.uniform() < domain.crossing_probability(m, b, half)) {
        a = m;
        t += half;
        break;
      }
    }
    if (trial == kMaxTrials) break;  // keep the current bracket
    dt = half;
  }
  const Point& nearest = std::abs(domain.depth(b)) < std::abs(domain.depth(a)) ? b : a;
  return {t + 0.5 * dt, domain.project(nearest)};
}

Hit first_exit(const Domain& domain, std::span<const double> start, double dt, int levels,
               std::size_t max_steps, Rng& rng) {
  const std::size_t d = start.size();
  Point cur(start.begin(), start.end()), next(d);
  const double sd = std::sqrt(dt);
  double t = 0.0;
  for (std::size_t step = 0; step < max_steps; ++step) {
    for (std::size_t i = 0; i < d; ++i) next[i] = cur[i] + sd * rng.gaussian();
    const double p = domain.crossing_probability(cur, next, dt);
    if (p >= 1.0 || (p > 0.0 && rng.uniform() < p)) {
      return localise(domain, cur, next, t, dt, levels, rng);
    }
    std::swap(cur, next);
    t += dt;
  }
  throw BudgetExceeded("sample_iterated_exit: no exit within " + std::to_string(max_steps) +
                       " steps");
}

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? " " : "") << x[i];
  return os.str();
}

void fill_metadata(VerificationReport& r, const Domain& domain, std::size_t n, Seed seed,
                   const ExitSettings& s) {
  r.metadata["domain"] = domain.describe();
  r.metadata["n"] = std::to_string(n);
  r.metadata["seed"] = std::to_string(seed.master);
  std::ostringstream step;
  step.precision(17);
  step << s.step;
  r.metadata["step"] = step.str();
}

void append_time_rows(VerificationReport& r, const ExitMoments& moments, const Point& x,
                      const std::vector<ExitSample>& samples) {
  std::vector<double> T(samples.size()), tau2(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    T[i] = samples[i].T;
    tau2[i] = samples[i].tau * samples[i].tau;
  }
  r.add_statistical("E[T] vs m2(x)", x, moments.m2(x), estimate_mean(T));
  r.add_statistical("E[T - tau^2] vs 0", x, 0.0, estimate_paired_difference(T, tau2));
}

void append_distribution_row(VerificationReport& r, const std::function<double(std::span<const double>)>& u,
                             const BoundaryData& f, const Point& x,
                             const std::vector<ExitSample>& samples) {
  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) values[i] = f(samples[i].exit_point);
  r.add_statistical("E[f(exit point)] vs harmonic u(x)", x, u(x), estimate_mean(values));
}

}  // namespace

ExitSample sample_iterated_exit(std::span<const double> x, const Domain& domain,
                                const ExitSettings& settings, Seed seed) {
  if (!(settings.step > 0.0)) throw InvalidInput("sample_iterated_exit: step must be positive");
  if (settings.refinement_levels < 0 || settings.refinement_levels > 60) {
    throw InvalidInput("sample_iterated_exit: refinement_levels must lie in [0, 60]");
  }
  if (x.size() != domain.dim()) throw InvalidInput("sample_iterated_exit: dimension mismatch");
  const double depth = domain.depth(x);
  const double tol = 1e-12 * std::max(1.0, domain.radius());
  if (depth < -tol) throw InvalidInput("sample_iterated_exit: start point outside the domain");
  if (depth <= tol) return {0.0, domain.project(x), 0.0};

  Rng outer(derive(seed, Stream::outer));
  const Hit out = first_exit(domain, x, settings.step, settings.refinement_levels,
                             settings.max_steps, outer);
  const double tau = out.time;

  Rng inner(derive(seed, Stream::inner));
  const Domain clock = Domain::interval(-tau, tau);
  const double zero = 0.0;
  const double inner_step = std::min(settings.step, tau * tau / 64.0);
  const Hit in = first_exit(clock, std::span<const double>(&zero, 1), inner_step,
                            settings.refinement_levels, settings.max_steps, inner);
  return {in.time, out.point, tau};
}

std::vector<ExitSample> sample_iterated_exits(std::span<const double> x, const Domain& domain,
                                              std::size_t n, const ExitSettings& settings,
                                              Seed seed) {
  if (n == 0) throw InvalidInput("sample_iterated_exits: n must be positive");
  std::vector<ExitSample> out(n);
  parallel_for(n, [&](std::size_t i) {
    out[i] = sample_iterated_exit(x, domain, settings, derive(seed, i));
  });
  return out;
}

bool VerificationReport::pass() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const ReportRow& r) { return r.informational || r.pass; });
}

void VerificationReport::add_statistical(std::string label, Point x, double theoretical,
                                         const Estimate& e) {
  const ZTest zt = summarize(e, theoretical);
  rows.push_back({std::move(label), std::move(x), theoretical, e, zt.z, 0.0, zt.pass, false});
}

void VerificationReport::add_deterministic(std::string label, Point x, double theoretical,
                                           double value, double tolerance, bool informational) {
  const bool ok = std::abs(value - theoretical) <= tolerance;
  rows.push_back({std::move(label), std::move(x), theoretical, Estimate{value, 0.0, 1}, 0.0,
                  tolerance, ok, informational});
}

std::pair<VerificationReport, VerificationReport> verify_exit_problem(
    const Domain& domain, const BoundaryData& f, std::span<const Point> x_list, std::size_t n,
    Seed seed, const ExitSettings& settings) {
  const auto u = dirichlet_solution(domain, f);
  const auto moments = solve_exit_moments(domain);
  VerificationReport dist{"exit distribution", {}, {}, {}};
  VerificationReport time{"iterated exit time", {}, {}, {}};
  fill_metadata(dist, domain, n, seed, settings);
  fill_metadata(time, domain, n, seed, settings);
  for (std::size_t k = 0; k < x_list.size(); ++k) {
    const auto samples = sample_iterated_exits(x_list[k], domain, n, settings, derive(seed, k));
    append_distribution_row(dist, u, f, x_list[k], samples);
    append_time_rows(time, moments, x_list[k], samples);
  }
  return {std::move(dist), std::move(time)};
}

VerificationReport verify_exit_distribution(const Domain& domain, const BoundaryData& f,
                                            std::span<const Point> x_list, std::size_t n,
                                            Seed seed, const ExitSettings& settings) {
  const auto u = dirichlet_solution(domain, f);
  VerificationReport r{"exit distribution", {}, {}, {}};
  fill_metadata(r, domain, n, seed, settings);
  for (std::size_t k = 0; k < x_list.size(); ++k) {
    const auto samples = sample_iterated_exits(x_list[k], domain, n, settings, derive(seed, k));
    append_distribution_row(r, u, f, x_list[k], samples);
  }
  return r;
}

VerificationReport verify_exit_time_moment(const Domain& domain, std::span<const Point> x_list,
                                           std::size_t n, Seed seed,
                                           const ExitSettings& settings) {
  const auto moments = solve_exit_moments(domain);
  VerificationReport r{"iterated exit time", {}, {}, {}};
  fill_metadata(r, domain, n, seed, settings);
  for (std::size_t k = 0; k < x_list.size(); ++k) {
    const auto samples = sample_iterated_exits(x_list[k], domain, n, settings, derive(seed, k));
    append_time_rows(r, moments, x_list[k], samples);
  }
  return r;
}

VerificationReport ito_truncation_check(const TestFunction& f, double t,
                                        std::span<const double> x, double tolerance) {
  if (!(t > 0.0)) throw InvalidInput("ito_truncation_check: t must be positive");
  if (x.size() != f.dim) throw InvalidInput("ito_truncation_check: dimension mismatch");
  if (f.dim > 2) throw InvalidInput("ito_truncation_check: only dimensions 1 and 2 are probed");
  constexpr double kProbeStep = 0.05;
  constexpr double kProbeTol = 1e-6;
  std::vector<Point> probes{Point(x.begin(), x.end())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double shift : {-0.5, 0.5}) {
      Point p(x.begin(), x.end());
      p[i] += shift;
      probes.push_back(std::move(p));
    }
  }
  for (const auto& p : probes) {
    const double b = bilaplacian_at(f.value, p, kProbeStep);
    if (!(std::abs(b) <= kProbeTol)) {
      throw InvalidInput("ito_truncation_check: " + f.name + " is not biharmonic (Lap^2 f = " +
                         std::to_string(b) + " at " + format_point(p) + ")");
    }
  }
  VerificationReport r{"Ito truncation", {}, {}, {}};
  r.metadata["f"] = f.name;
  std::ostringstream ts;
  ts.precision(17);
  ts << t;
  r.metadata["t"] = ts.str();
  const double lhs = gauss_semigroup(f, t, x);
  const double rhs = f(x) + 0.5 * t * f.laplacian(x);
  r.add_deterministic("E f(x + sqrt(t) Z) vs f(x) + t Lap f(x) / 2", Point(x.begin(), x.end()),
                      rhs, lhs, tolerance);
  return r;
}

BilaplacianCandidates bilaplacian_candidates(const ExitMoments& moments, const TestFunction& f,
                                              std::span<const double> x, double h) {
  const Domain& domain = moments.domain;
  if (x.size() != f.dim || x.size() != domain.dim()) {
    throw InvalidInput("bilaplacian_candidates: dimension mismatch");
  }
  if (x.size() > 2) throw InvalidInput("bilaplacian_candidates: only dimensions 1 and 2");
  if (domain.depth(x) < 2.0 * h) {
    throw InvalidInput("bilaplacian_candidates: stencil at " + format_point(x) +
                       " leaves the domain");
  }
  auto u = [&](std::span<const double> y) {
    return gauss_semigroup(f, std::max(0.0, moments.m2(y)), y);
  };
  const std::size_t d = x.size();
  const double lap_f = f.laplacian(x);
  const auto grad_lap_f = f.grad_laplacian(x);
  const auto hess_lap_f = f.hessian_laplacian(x);
  const auto grad_lap_m2 = moments.m2.laplacian().gradient(x);
  const auto hess_m2 = moments.m2.hessian(x);

  double dot = 0.0, full = 0.0, off = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    dot += grad_lap_f[i] * grad_lap_m2[i];
    for (std::size_t j = 0; j < d; ++j) {
      const double term = hess_lap_f[i * d + j] * hess_m2[i * d + j];
      full += term;
      if (i != j) off += term;
    }
  }
  BilaplacianCandidates c;
  c.fd = bilaplacian_at(u, x, h);
  c.printed = 4.0 * lap_f + dot + 2.0 * off;
  c.derived = 4.0 * lap_f + 2.0 * dot + 2.0 * full;
  c.laplacian_only = 4.0 * lap_f;
  return c;
}

VerificationReport verify_elliptic_bilaplacian(const Domain& domain, const TestFunction& f,
                                               std::span<const Point> x_list, double h,
                                               double tolerance, std::span<const Point> boundary) {
  const auto moments = solve_exit_moments(domain);
  VerificationReport r{"Lap^2 u for u(x) = E f(X(m2(x)))", {}, {}, {}};
  r.metadata["domain"] = domain.describe();
  r.metadata["f"] = f.name;
  std::ostringstream hs;
  hs.precision(17);
  hs << h;
  r.metadata["h"] = hs.str();
  for (const auto& x : x_list) {
    const auto c = bilaplacian_candidates(moments, f, x, h);
    const auto g = f.grad_laplacian(x);
    const bool flat = std::all_of(g.begin(), g.end(), [](double v) { return std::abs(v) < 1e-12; });
    r.add_deterministic("derived: 4 Lap f + 2 grad Lap f . grad Lap m2 + 2 sum_ij", x, c.derived,
                        c.fd, tolerance);
    r.add_deterministic("laplacian only: 4 Lap f", x, c.laplacian_only, c.fd, tolerance, !flat);
    r.add_deterministic("printed: 4 Lap f + grad Lap f . grad Lap m2 + 2 sum_(i!=j)", x, c.printed,
                        c.fd, tolerance, true);
    if (std::abs(c.printed - c.fd) > tolerance) {
      std::ostringstream note;
      note.precision(10);
      note << "printed candidate mismatch at x = " << format_point(x) << ": " << c.printed
           << " vs finite-difference " << c.fd;
      r.notes.push_back(note.str());
    }
  }
  for (const auto& b : boundary) {
    const double u = gauss_semigroup(f, std::max(0.0, moments.m2(b)), b);
    r.add_deterministic("u = f on the boundary", b, f(b), u, 1e-10);
  }
  return r;
}

}  // namespace btp
