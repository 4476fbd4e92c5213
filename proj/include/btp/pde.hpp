#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "btp/paths.hpp"
#include "btp/quadrature.hpp"
#include "btp/test_function.hpp"

namespace btp {

/// Uniform nodes x_min + i*h (i < nx) and t_min + j*dt (j < nt), t_min > 0.
class SpaceTimeGrid {
public:
  SpaceTimeGrid(double x_min, double h, std::size_t nx, double t_min, double dt, std::size_t nt);

  /// Nodes covering [x_min, x_max] x [t_min, t_max]; the ranges must be whole
  /// multiples of the steps to within 1e-9 of a step.
  static SpaceTimeGrid covering(double x_min, double x_max, double h, double t_min, double t_max,
                                double dt);

  double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * h_; }
  double t(std::size_t j) const noexcept { return t_min_ + static_cast<double>(j) * dt_; }
  double h() const noexcept { return h_; }
  double dt() const noexcept { return dt_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t nt() const noexcept { return nt_; }
  std::size_t size() const noexcept { return nx_ * nt_; }
  /// Storage index of node (i, j): time-major.
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx_ + i; }

private:
  double x_min_, h_;
  std::size_t nx_;
  double t_min_, dt_;
  std::size_t nt_;
};

/// Samples u(t, x) at every node of the grid.
std::vector<double> sample_on(const SpaceTimeGrid& grid, const std::function<double(double, double)>& u);

/// Bounded domain: an interval, a ball, or an axis-aligned box. Boxes are
/// supported by the exit sampler only; the closed-form solvers reject them.
class Domain {
public:
  enum class Shape { Interval, Ball, Box };

  static Domain interval(double a, double b);
  static Domain ball(Point center, double radius);
  static Domain box(Point lower, Point upper);

  /// "interval:a,b" or "ball:r,d" (ball centred at the origin).
  static Domain parse(const std::string& text);

  Shape shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept { return lower_.size(); }
  const Point& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  const Point& lower() const noexcept { return lower_; }
  const Point& upper() const noexcept { return upper_; }
  std::string describe() const;

  /// Signed distance to the boundary, positive inside.
  double depth(std::span<const double> x) const;
  bool contains(std::span<const double> x) const { return depth(x) > 0.0; }

  /// Probability that a Brownian bridge of duration dt between the interior
  /// points a and b touches the boundary, treating each boundary piece as its
  /// tangent half-space. Returns 1 if either point is not inside.
  double crossing_probability(std::span<const double> a, std::span<const double> b,
                              double dt) const;

  /// Nearest boundary point.
  Point project(std::span<const double> x) const;

private:
  Shape shape_ = Shape::Interval;
  Point center_;
  double radius_ = 0.0;
  Point lower_, upper_;
};

/// Polynomial in rho^2 = |x - center|^2:  sum_k c_k rho^(2k).
class RadialPolynomial {
public:
  RadialPolynomial(Point center, std::vector<double> coefficients);

  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  double operator()(std::span<const double> x) const;
  Point gradient(std::span<const double> x) const;
  /// Row-major d*d.
  std::vector<double> hessian(std::span<const double> x) const;
  /// Laplacian as a radial polynomial (exact).
  RadialPolynomial laplacian() const;

private:
  Point center_;
  std::vector<double> coefficients_;
};

/// First two moments of the exit time of Brownian motion from a domain:
/// (1/2) Lap m1 = -1 and (1/2) Lap m2 = -2 m1, both zero on the boundary.
struct ExitMoments {
  RadialPolynomial m1;
  RadialPolynomial m2;
  Domain domain;
};

/// Interval and Ball only (radial closed form); Box is InvalidInput.
ExitMoments solve_exit_moments(const Domain& domain);

/// Values on a uniform 1D grid starting at x_min.
struct GridFunction1D {
  double x_min = 0.0;
  double h = 0.0;
  std::vector<double> values;
};

/// Values on a uniform 2D grid, index iy * nx + ix.
struct GridFunction2D {
  double x_min = 0.0, y_min = 0.0;
  double h = 0.0;
  std::size_t nx = 0, ny = 0;
  std::vector<double> values;
};

/// Discrete bi-Laplacian on the interior nodes with full stencil support
/// (two nodes in from each edge): 1D stencil (1, -4, 6, -4, 1)/h^4, 2D
/// 13-point stencil. Exact on quartics.
GridFunction1D bilaplacian_fd(const GridFunction1D& u);
GridFunction2D bilaplacian_fd(const GridFunction2D& u);

/// Bi-Laplacian of a function at one point with the 1D or 2D stencil.
double bilaplacian_at(const std::function<double(std::span<const double>)>& u,
                      std::span<const double> x, double h);

struct ResidualGrid {
  std::size_t i_begin = 0, i_end = 0;  // spatial node range [begin, end)
  std::size_t j_begin = 0, j_end = 0;  // temporal node range
  std::vector<double> values;          // (j - j_begin) * (i_end - i_begin) + (i - i_begin)
  double max_abs() const;
};

struct ResidualOptions {
  /// Order of the central difference in t: 2, 4 or 6. The space stencils are
  /// second order.
  int time_order = 6;
};

/// R = u_t - A f / sqrt(2 pi t) - (1/2) A^2 u at every node with full stencil
/// support, for one-dimensional f and u stored by SpaceTimeGrid::index. For
/// the half-Laplacian, A^2 = Lap^2 / 4; for div(g grad) the conservative
/// three-point operator is applied twice.
ResidualGrid parabolic_residual(const std::vector<double>& u, const SpaceTimeGrid& grid,
                                const TestFunction& f, const GeneratorSpec& gen,
                                const ResidualOptions& options = {});

using BoundaryData = std::function<double(std::span<const double>)>;

/// Harmonic extension of boundary data: affine on intervals, Poisson-kernel
/// quadrature on balls of dimension 1, 2 or 3.
std::function<double(std::span<const double>)> dirichlet_solution(
    const Domain& domain, BoundaryData f, const QuadratureSettings& settings = {});

}  // namespace btp
