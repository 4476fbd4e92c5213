#include "btp/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "btp/errors.hpp"

namespace btp {
namespace {

double norm2(std::span<const double> x, const Point& c) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
  return r2;
}

void require_dim(const Domain& d, std::span<const double> x, const char* who) {
  if (x.size() != d.dim()) throw InvalidInput(std::string(who) + ": point dimension mismatch");
}

double parse_real(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidInput("cannot parse '" + s + "' in " + context);
  }
  if (used != s.size()) throw InvalidInput("cannot parse '" + s + "' in " + context);
  return v;
}

// exp(-2 * 20) ~ 4e-18: crossing probabilities below this are treated as 0.
constexpr double kNegligible = 20.0;

// Central first-derivative weights for offsets -m..m.
std::vector<double> central_weights(int order) {
  switch (order) {
    case 2: return {-0.5, 0.0, 0.5};
    case 4: return {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
    case 6: return {-1.0 / 60, 3.0 / 20, -0.75, 0.0, 0.75, -3.0 / 20, 1.0 / 60};
    default: throw InvalidInput("parabolic_residual: time_order must be 2, 4 or 6");
  }
}

}  // namespace

SpaceTimeGrid::SpaceTimeGrid(double x_min, double h, std::size_t nx, double t_min, double dt,
                             std::size_t nt)
    : x_min_(x_min), h_(h), nx_(nx), t_min_(t_min), dt_(dt), nt_(nt) {
  if (!(h > 0.0) || !(dt > 0.0) || !std::isfinite(x_min) || !std::isfinite(t_min)) {
    throw InvalidInput("SpaceTimeGrid: steps must be positive and origins finite");
  }
  if (!(t_min > 0.0)) throw InvalidInput("SpaceTimeGrid: first time node must be positive");
  if (nx == 0 || nt == 0) throw InvalidInput("SpaceTimeGrid: empty grid");
}

SpaceTimeGrid SpaceTimeGrid::covering(double x_min, double x_max, double h, double t_min,
                                      double t_max, double dt) {
  if (!(x_max > x_min) || !(t_max > t_min)) throw InvalidInput("SpaceTimeGrid: empty range");
  if (!(h > 0.0) || !(dt > 0.0)) throw InvalidInput("SpaceTimeGrid: steps must be positive");
  const double sx = (x_max - x_min) / h;
  const double st = (t_max - t_min) / dt;
  if (std::abs(sx - std::round(sx)) > 1e-9 || std::abs(st - std::round(st)) > 1e-9) {
    throw InvalidInput("SpaceTimeGrid: range is not a whole number of steps");
  }
  return SpaceTimeGrid(x_min, h, static_cast<std::size_t>(std::llround(sx)) + 1, t_min, dt,
                       static_cast<std::size_t>(std::llround(st)) + 1);
}

std::vector<double> sample_on(const SpaceTimeGrid& grid,
                              const std::function<double(double, double)>& u) {
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.nt(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) out[grid.index(i, j)] = u(grid.t(j), grid.x(i));
  return out;
}

// ---- Domain ---------------------------------------------------------------

Domain Domain::interval(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidInput("Domain::interval: requires finite a < b");
  }
  Domain d;
  d.shape_ = Shape::Interval;
  d.center_ = {0.5 * (a + b)};
  d.radius_ = 0.5 * (b - a);
  d.lower_ = {a};
  d.upper_ = {b};
  return d;
}

Domain Domain::ball(Point center, double radius) {
  if (center.empty()) throw InvalidInput("Domain::ball: dimension must be at least 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidInput("Domain::ball: radius must be positive");
  }
  Domain d;
  d.shape_ = Shape::Ball;
  d.radius_ = radius;
  d.lower_ = center;
  d.upper_ = center;
  for (std::size_t i = 0; i < center.size(); ++i) {
    d.lower_[i] -= radius;
    d.upper_[i] += radius;
  }
  d.center_ = std::move(center);
  return d;
}

Domain Domain::box(Point lower, Point upper) {
  if (lower.empty() || lower.size() != upper.size()) {
    throw InvalidInput("Domain::box: corner dimensions differ");
  }
  Domain d;
  d.shape_ = Shape::Box;
  d.center_.resize(lower.size());
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw InvalidInput("Domain::box: requires lower < upper");
    d.center_[i] = 0.5 * (lower[i] + upper[i]);
  }
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  return d;
}

Domain Domain::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidInput("domain '" + text + "': expected kind:args");
  const std::string kind = text.substr(0, colon);
  std::vector<std::string> args;
  std::stringstream ss(text.substr(colon + 1));
  for (std::string item; std::getline(ss, item, ',');) args.push_back(item);
  if (args.size() != 2) throw InvalidInput("domain '" + text + "': expected two arguments");
  if (kind == "interval") {
    return interval(parse_real(args[0], "domain"), parse_real(args[1], "domain"));
  }
  if (kind == "ball") {
    const double r = parse_real(args[0], "domain");
    const double d = parse_real(args[1], "domain");
    if (d < 1.0 || d != std::floor(d) || d > 16.0) {
      throw InvalidInput("domain '" + text + "': dimension must be an integer in [1, 16]");
    }
    return ball(Point(static_cast<std::size_t>(d), 0.0), r);
  }
  throw InvalidInput("domain '" + text + "': unknown kind '" + kind + "'");
}

std::string Domain::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (shape_) {
    case Shape::Interval: os << "interval:" << lower_[0] << ',' << upper_[0]; break;
    case Shape::Ball:
      os << "ball:" << radius_ << ',' << dim();
      if (std::any_of(center_.begin(), center_.end(), [](double c) { return c != 0.0; })) {
        os << "@(";
        for (std::size_t i = 0; i < center_.size(); ++i) os << (i ? " " : "") << center_[i];
        os << ')';
      }
      break;
    case Shape::Box:
      os << "box:(";
      for (std::size_t i = 0; i < dim(); ++i) os << (i ? " " : "") << lower_[i];
      os << ")-(";
      for (std::size_t i = 0; i < dim(); ++i) os << (i ? " " : "") << upper_[i];
      os << ')';
      break;
  }
  return os.str();
}

double Domain::depth(std::span<const double> x) const {
  require_dim(*this, x, "Domain::depth");
  if (shape_ == Shape::Ball) return radius_ - std::sqrt(norm2(x, center_));
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) d = std::min({d, x[i] - lower_[i], upper_[i] - x[i]});
  return d;
}

double Domain::crossing_probability(std::span<const double> a, std::span<const double> b,
                                    double dt) const {
  if (shape_ == Shape::Ball) {
    const double da = depth(a), db = depth(b);
    if (da <= 0.0 || db <= 0.0) return 1.0;
    return da * db < kNegligible * dt ? std::exp(-2.0 * da * db / dt) : 0.0;
  }
  require_dim(*this, a, "Domain::crossing_probability");
  require_dim(*this, b, "Domain::crossing_probability");
  double survive = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double la = a[i] - lower_[i], lb = b[i] - lower_[i];
    const double ua = upper_[i] - a[i], ub = upper_[i] - b[i];
    if (la <= 0.0 || lb <= 0.0 || ua <= 0.0 || ub <= 0.0) return 1.0;
    if (la * lb < kNegligible * dt) survive *= 1.0 - std::exp(-2.0 * la * lb / dt);
    if (ua * ub < kNegligible * dt) survive *= 1.0 - std::exp(-2.0 * ua * ub / dt);
  }
  return 1.0 - survive;
}

Point Domain::project(std::span<const double> x) const {
  require_dim(*this, x, "Domain::project");
  Point p(x.begin(), x.end());
  if (shape_ == Shape::Ball) {
    const double r = std::sqrt(norm2(x, center_));
    if (r == 0.0) {
      p = center_;
      p[0] += radius_;
      return p;
    }
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = center_[i] + radius_ * (x[i] - center_[i]) / r;
    return p;
  }
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], lower_[i], upper_[i]);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  bool to_upper = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] - lower_[i] < best_d) best_d = p[i] - lower_[i], best = i, to_upper = false;
    if (upper_[i] - p[i] < best_d) best_d = upper_[i] - p[i], best = i, to_upper = true;
  }
  p[best] = to_upper ? upper_[best] : lower_[best];
  return p;
}

// ---- exit moments -----------------------------------------------------------

RadialPolynomial::RadialPolynomial(Point center, std::vector<double> coefficients)
    : center_(std::move(center)), coefficients_(std::move(coefficients)) {}

double RadialPolynomial::operator()(std::span<const double> x) const {
  const double r2 = norm2(x, center_);
  double v = 0.0;
  for (std::size_t k = coefficients_.size(); k-- > 0;) v = v * r2 + coefficients_[k];
  return v;
}

Point RadialPolynomial::gradient(std::span<const double> x) const {
  const double r2 = norm2(x, center_);
  // d/d(r2) of the polynomial, times 2 y.
  double dp = 0.0;
  for (std::size_t k = coefficients_.size(); k-- > 1;) {
    dp = dp * r2 + static_cast<double>(k) * coefficients_[k];
  }
  Point g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * dp * (x[i] - center_[i]);
  return g;
}

std::vector<double> RadialPolynomial::hessian(std::span<const double> x) const {
  const double r2 = norm2(x, center_);
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t k = coefficients_.size(); k-- > 1;) {
    d1 = d1 * r2 + static_cast<double>(k) * coefficients_[k];
  }
  for (std::size_t k = coefficients_.size(); k-- > 2;) {
    d2 = d2 * r2 + static_cast<double>(k * (k - 1)) * coefficients_[k];
  }
  const std::size_t d = x.size();
  std::vector<double> H(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double yi = x[i] - center_[i], yj = x[j] - center_[j];
      H[i * d + j] = 4.0 * d2 * yi * yj + (i == j ? 2.0 * d1 : 0.0);
    }
  }
  return H;
}

RadialPolynomial RadialPolynomial::laplacian() const {
  const double d = static_cast<double>(center_.size());
  std::vector<double> c(std::max<std::size_t>(coefficients_.size(), 2) - 1, 0.0);
  for (std::size_t k = 1; k < coefficients_.size(); ++k) {
    const double kk = static_cast<double>(k);
    c[k - 1] = 2.0 * kk * (2.0 * kk - 2.0 + d) * coefficients_[k];
  }
  return RadialPolynomial(center_, std::move(c));
}

namespace {

// Radial solution of (1/2) Lap v = -g on the ball of radius r, v = 0 on the sphere.
RadialPolynomial solve_half_poisson(const RadialPolynomial& g, const Point& center, double r) {
  const double d = static_cast<double>(center.size());
  const auto& gc = g.coefficients();
  std::vector<double> c(gc.size() + 1, 0.0);
  for (std::size_t k = 0; k < gc.size(); ++k) {
    const double kk = static_cast<double>(k);
    c[k + 1] = -2.0 * gc[k] / ((2.0 * kk + 2.0) * (2.0 * kk + d));
  }
  double at_r = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) at_r = (at_r + c[k]) * r * r;
  c[0] = -at_r;
  return RadialPolynomial(center, std::move(c));
}

}  // namespace

ExitMoments solve_exit_moments(const Domain& domain) {
  if (domain.shape() == Domain::Shape::Box) {
    throw InvalidInput("solve_exit_moments: only intervals and balls are supported");
  }
  const auto& c = domain.center();
  const double r = domain.radius();
  RadialPolynomial m1 = solve_half_poisson(RadialPolynomial(c, {1.0}), c, r);
  std::vector<double> twice_m1 = m1.coefficients();
  for (double& v : twice_m1) v *= 2.0;
  RadialPolynomial m2 = solve_half_poisson(RadialPolynomial(c, std::move(twice_m1)), c, r);
  return {std::move(m1), std::move(m2), domain};
}

// ---- finite differences -------------------------------------------------------

GridFunction1D bilaplacian_fd(const GridFunction1D& u) {
  if (u.values.size() < 5) throw InvalidInput("bilaplacian_fd: need at least 5 nodes");
  if (!(u.h > 0.0)) throw InvalidInput("bilaplacian_fd: step must be positive");
  const double h4 = std::pow(u.h, 4);
  GridFunction1D out{u.x_min + 2.0 * u.h, u.h, std::vector<double>(u.values.size() - 4)};
  const auto& v = u.values;
  for (std::size_t i = 2; i + 2 < v.size(); ++i) {
    out.values[i - 2] = (v[i - 2] - 4.0 * v[i - 1] + 6.0 * v[i] - 4.0 * v[i + 1] + v[i + 2]) / h4;
  }
  return out;
}

GridFunction2D bilaplacian_fd(const GridFunction2D& u) {
  if (u.nx < 5 || u.ny < 5) throw InvalidInput("bilaplacian_fd: need at least 5 nodes per axis");
  if (u.values.size() != u.nx * u.ny) throw InvalidInput("bilaplacian_fd: size mismatch");
  if (!(u.h > 0.0)) throw InvalidInput("bilaplacian_fd: step must be positive");
  const double h4 = std::pow(u.h, 4);
  GridFunction2D out{u.x_min + 2.0 * u.h, u.y_min + 2.0 * u.h, u.h, u.nx - 4, u.ny - 4, {}};
  out.values.resize(out.nx * out.ny);
  auto at = [&](std::size_t ix, std::size_t iy) { return u.values[iy * u.nx + ix]; };
  for (std::size_t iy = 2; iy + 2 < u.ny; ++iy) {
    for (std::size_t ix = 2; ix + 2 < u.nx; ++ix) {
      const double s = 20.0 * at(ix, iy) -
                       8.0 * (at(ix - 1, iy) + at(ix + 1, iy) + at(ix, iy - 1) + at(ix, iy + 1)) +
                       2.0 * (at(ix - 1, iy - 1) + at(ix + 1, iy - 1) + at(ix - 1, iy + 1) +
                              at(ix + 1, iy + 1)) +
                       at(ix - 2, iy) + at(ix + 2, iy) + at(ix, iy - 2) + at(ix, iy + 2);
      out.values[(iy - 2) * out.nx + (ix - 2)] = s / h4;
    }
  }
  return out;
}

double bilaplacian_at(const std::function<double(std::span<const double>)>& u,
                      std::span<const double> x, double h) {
  if (!(h > 0.0)) throw InvalidInput("bilaplacian_at: step must be positive");
  Point y(x.begin(), x.end());
  if (x.size() == 1) {
    GridFunction1D g{x[0] - 2.0 * h, h, std::vector<double>(5)};
    for (int k = -2; k <= 2; ++k) {
      y[0] = x[0] + k * h;
      g.values[static_cast<std::size_t>(k + 2)] = u(y);
    }
    return bilaplacian_fd(g).values[0];
  }
  if (x.size() == 2) {
    GridFunction2D g{x[0] - 2.0 * h, x[1] - 2.0 * h, h, 5, 5, std::vector<double>(25, 0.0)};
    for (int ky = -2; ky <= 2; ++ky) {
      for (int kx = -2; kx <= 2; ++kx) {
        if (std::abs(kx) + std::abs(ky) > 2) continue;  // not in the 13-point stencil
        y[0] = x[0] + kx * h;
        y[1] = x[1] + ky * h;
        g.values[static_cast<std::size_t>((ky + 2) * 5 + kx + 2)] = u(y);
      }
    }
    return bilaplacian_fd(g).values[0];
  }
  throw InvalidInput("bilaplacian_at: only dimensions 1 and 2 are supported");
}

double ResidualGrid::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

ResidualGrid parabolic_residual(const std::vector<double>& u, const SpaceTimeGrid& grid,
                                const TestFunction& f, const GeneratorSpec& gen,
                                const ResidualOptions& options) {
  if (f.dim != 1) throw InvalidInput("parabolic_residual: one-dimensional f required");
  if (u.size() != grid.size()) throw InvalidInput("parabolic_residual: u does not match grid");
  const auto w = central_weights(options.time_order);
  const std::size_t m = w.size() / 2;
  if (grid.nx() < 5) throw InvalidInput("parabolic_residual: need at least 5 spatial nodes");
  if (grid.nt() < 2 * m + 1) {
    throw InvalidInput("parabolic_residual: need at least " + std::to_string(2 * m + 1) +
                       " time nodes");
  }
  const double h = grid.h();
  const double h2 = h * h;
  const bool half_lap = gen.variant == GeneratorSpec::Variant::HalfLaplacian;

  ResidualGrid r;
  r.i_begin = 2;
  r.i_end = grid.nx() - 2;
  r.j_begin = m;
  r.j_end = grid.nt() - m;
  const std::size_t width = r.i_end - r.i_begin;
  r.values.resize(width * (r.j_end - r.j_begin));

  // Generator applied to f, and the coefficient at half nodes.
  std::vector<double> af(grid.nx()), g_half(grid.nx() + 1);
  for (std::size_t i = 0; i < grid.nx(); ++i) {
    const double x = grid.x(i);
    const std::span<const double> xs(&x, 1);
    const double f1 = f.gradient(xs)[0], f2 = f.hessian(xs)[0];
    if (half_lap) {
      af[i] = 0.5 * f2;
    } else {
      af[i] = gen.coefficient(xs) * f2 + gen.coefficient_gradient(xs)[0] * f1;
    }
  }
  if (!half_lap) {
    for (std::size_t i = 0; i <= grid.nx(); ++i) {
      const double x = grid.x(0) + (static_cast<double>(i) - 0.5) * h;
      g_half[i] = gen.coefficient(std::span<const double>(&x, 1));
      if (!std::isfinite(g_half[i])) {
        throw NumericalDomainError("parabolic_residual: non-finite coefficient");
      }
    }
  }
  std::vector<double> lu(grid.nx());
  for (std::size_t j = r.j_begin; j < r.j_end; ++j) {
    const double* row = u.data() + grid.index(0, j);
    if (!half_lap) {
      // g_half[i] sits at x_i - h/2.
      for (std::size_t i = 1; i + 1 < grid.nx(); ++i) {
        lu[i] = (g_half[i + 1] * (row[i + 1] - row[i]) - g_half[i] * (row[i] - row[i - 1])) / h2;
      }
    }
    const double t = grid.t(j);
    const double source_scale = 1.0 / std::sqrt(2.0 * std::numbers::pi * t);
    for (std::size_t i = r.i_begin; i < r.i_end; ++i) {
      double ut = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] != 0.0) ut += w[k] * u[grid.index(i, j + k - m)];
      }
      ut /= grid.dt();
      double a2u;
      if (half_lap) {
        a2u = 0.25 *
              (row[i - 2] - 4.0 * row[i - 1] + 6.0 * row[i] - 4.0 * row[i + 1] + row[i + 2]) /
              (h2 * h2);
      } else {
        a2u = (g_half[i + 1] * (lu[i + 1] - lu[i]) - g_half[i] * (lu[i] - lu[i - 1])) / h2;
      }
      r.values[(j - r.j_begin) * width + (i - r.i_begin)] =
          ut - af[i] * source_scale - 0.5 * a2u;
    }
  }
  return r;
}

// ---- Dirichlet problem ---------------------------------------------------------

std::function<double(std::span<const double>)> dirichlet_solution(
    const Domain& domain, BoundaryData f, const QuadratureSettings& settings) {
  settings.validate();
  if (!f) throw InvalidInput("dirichlet_solution: boundary data is empty");
  if (domain.shape() == Domain::Shape::Box) {
    throw InvalidInput("dirichlet_solution: only intervals and balls are supported");
  }
  const std::size_t d = domain.dim();
  if (d > 3) throw InvalidInput("dirichlet_solution: balls of dimension > 3 are not supported");

  auto outside_check = [domain](std::span<const double> x) {
    if (x.size() != domain.dim()) throw InvalidInput("dirichlet_solution: dimension mismatch");
    const double depth = domain.depth(x);
    if (depth < -1e-12 * std::max(1.0, domain.radius())) {
      throw InvalidInput("dirichlet_solution: point lies outside the domain");
    }
    return depth <= 0.0;
  };

  if (d == 1) {
    const double a = domain.lower()[0], b = domain.upper()[0];
    const double fa = f(std::span<const double>(&a, 1));
    const double fb = f(std::span<const double>(&b, 1));
    return [=](std::span<const double> x) {
      outside_check(x);
      return fa + (fb - fa) * (x[0] - a) / (b - a);
    };
  }
  const Point c = domain.center();
  const double r = domain.radius();
  if (d == 2) {
    return [=](std::span<const double> x) {
      if (outside_check(x)) return f(domain.project(x));
      const double y0 = x[0] - c[0], y1 = x[1] - c[1];
      const double rho2 = y0 * y0 + y1 * y1;
      // Centre the angular range on the direction of x, where the kernel peaks.
      const double phi = std::atan2(y1, y0);
      Point xi(2);
      auto integrand = [&](double theta) {
        xi[0] = c[0] + r * std::cos(theta);
        xi[1] = c[1] + r * std::sin(theta);
        const double dx = x[0] - xi[0], dy = x[1] - xi[1];
        return f(xi) / (dx * dx + dy * dy);
      };
      const double left = integrate(integrand, phi - std::numbers::pi, phi, settings).value;
      const double right = integrate(integrand, phi, phi + std::numbers::pi, settings).value;
      return (r * r - rho2) / (2.0 * std::numbers::pi) * (left + right);
    };
  }
  return [=](std::span<const double> x) {
    if (outside_check(x)) return f(domain.project(x));
    const double rho2 = norm2(x, c);
    Point xi(3);
    auto outer = [&](double polar) {
      const double sp = std::sin(polar), cp = std::cos(polar);
      auto inner = [&](double azimuth) {
        xi[0] = c[0] + r * sp * std::cos(azimuth);
        xi[1] = c[1] + r * sp * std::sin(azimuth);
        xi[2] = c[2] + r * cp;
        const double dist2 = norm2(x, xi);
        return f(xi) / (dist2 * std::sqrt(dist2));
      };
      return sp * integrate(inner, 0.0, 2.0 * std::numbers::pi, settings).value;
    };
    const double surface = integrate(outer, 0.0, std::numbers::pi, settings).value;
    return (r * r - rho2) * r / (4.0 * std::numbers::pi) * surface;
  };
}

}  // namespace btp
