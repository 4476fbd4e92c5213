#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

#include "btp/errors.hpp"
#include "btp/kernels.hpp"
#include "btp/quadrature.hpp"
#include "btp/test_function.hpp"
#include "doctest.h"

using namespace btp;
using boost::math::quadrature::exp_sinh;
using boost::math::quadrature::sinh_sinh;

namespace {

const double kPi = std::numbers::pi;

double normal_pdf(double z, double var) { return std::exp(-z * z / (2 * var)) / std::sqrt(2 * kPi * var); }

// E cos(x + W(s)) = cos(x) exp(-s/2), E exp(-(x + W(s))^2) = exp(-x^2/(1+2s)) / sqrt(1+2s).
double cosine_semigroup(double s, double x) { return std::cos(x) * std::exp(-s / 2); }
double gauss_semigroup_exact(double s, double x) {
  return std::exp(-x * x / (1 + 2 * s)) / std::sqrt(1 + 2 * s);
}

// 2 int_0^inf N(0,t)(s) g(s) ds by exp-sinh.
template <class G>
double clock_average(double t, G g) {
  exp_sinh<double> q;
  return 2.0 * q.integrate([&](double s) { return normal_pdf(s, t) * g(s); });
}

}  // namespace

TEST_CASE("adaptive Gauss-Kronrod integration") {
  const QuadratureSettings s;
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, kPi, s).value ==
        doctest::Approx(2.0).epsilon(1e-13));
  CHECK(integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0, s).value ==
        doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
  CHECK(integrate([](double x) { return x; }, 1.0, 0.0, s).value == doctest::Approx(-0.5));
  CHECK(integrate([](double x) { return x; }, 1.0, 1.0, s).value == 0.0);

  QuadratureSettings tight;
  tight.max_subdivisions = 3;
  CHECK_THROWS_AS(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, tight), AccuracyError);
  CHECK_THROWS_AS(integrate([](double) { return NAN; }, 0.0, 1.0, s), NumericalDomainError);

  QuadratureSettings bad;
  bad.truncation_radius_multiplier = 3.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = {};
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("vector integration agrees with scalar integration per component") {
  const QuadratureSettings s;
  const std::vector<double> a{0.5, 1.0, 2.0, 4.0};
  const auto v = integrate_many(
      [&](double x, std::span<double> out) {
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::exp(-a[i] * x * x);
      },
      a.size(), -8.0, 8.0, s);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(v[i] == doctest::Approx(std::sqrt(kPi / a[i])).epsilon(1e-12));
  }
}

TEST_CASE("heat kernel: normalisation and Chapman-Kolmogorov") {
  sinh_sinh<double> line;
  CHECK(line.integrate([](double y) { return heat_kernel(0.0, 0.7, 0.3, y); }) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // p(0,t;x,y) = int p(0,s;x,z) p(s,t;z,y) dz
  const double x = 0.2, y = -0.9, s = 0.4, t = 1.3;
  const double ck =
      line.integrate([&](double z) { return heat_kernel(0.0, s, x, z) * heat_kernel(s, t, z, y); });
  CHECK(ck == doctest::Approx(heat_kernel(0.0, t, x, y)).epsilon(1e-11));

  const std::vector<double> x2{0.1, 0.2}, y2{-0.3, 0.5};
  CHECK(heat_kernel(0.5, 1.5, x2, y2) ==
        doctest::Approx(heat_kernel(0.5, 1.5, 0.1, -0.3) * heat_kernel(0.5, 1.5, 0.2, 0.5)));
  CHECK_THROWS_AS(heat_kernel(1.0, 1.0, 0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(heat_kernel(0.0, 1.0, x2, std::vector<double>{0.0}), InvalidInput);
}

TEST_CASE("reflected kernel: mass on the half-line and Chapman-Kolmogorov") {
  exp_sinh<double> half;
  CHECK(half.integrate([](double z) { return reflected_kernel(0.0, 0.8, 0.6, z); }) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const double y = 0.3, z = 1.1, s = 0.5, t = 1.2;
  const double ck = half.integrate(
      [&](double w) { return reflected_kernel(0.0, s, y, w) * reflected_kernel(s, t, w, z); });
  CHECK(ck == doctest::Approx(reflected_kernel(0.0, t, y, z)).epsilon(1e-11));
  // The images: sum of the two Gaussian densities.
  CHECK(reflected_kernel(0.0, 1.0, 0.4, 0.9) ==
        doctest::Approx(heat_kernel(0.0, 1.0, 0.4, 0.9) + heat_kernel(0.0, 1.0, -0.4, 0.9)));
  CHECK_THROWS_AS(reflected_kernel(0.0, 1.0, -0.1, 0.2), InvalidInput);
}

TEST_CASE("Gaussian semigroup against closed forms") {
  const auto cosine = make_test_function("cosine");
  const auto gauss = make_test_function("gauss");
  for (double s : {0.0, 0.01, 0.5, 3.0}) {
    for (double x : {-1.2, 0.0, 0.7}) {
      CAPTURE(s);
      CAPTURE(x);
      const std::vector<double> p{x};
      CHECK(gauss_semigroup(cosine, s, p) == doctest::Approx(cosine_semigroup(s, x)).epsilon(1e-11));
      CHECK(gauss_semigroup(gauss, s, p) ==
            doctest::Approx(gauss_semigroup_exact(s, x)).epsilon(1e-11));
    }
  }
  // x1^2 - x2^2 is harmonic, hence invariant.
  const auto h = make_test_function("harmonic2d", 2);
  const std::vector<double> p{0.4, -1.1};
  CHECK(gauss_semigroup(h, 0.9, p) == doctest::Approx(h(p)).epsilon(1e-11));
  CHECK_THROWS_AS(gauss_semigroup(h, 0.9, std::vector<double>{0.1}), InvalidInput);
  CHECK_THROWS_AS(gauss_semigroup(cosine, -1.0, std::vector<double>{0.1}), InvalidInput);
}

TEST_CASE("BTP marginal against independent quadrature and closed forms") {
  const auto square = make_test_function("square");
  const auto cosine = make_test_function("cosine");
  const auto gauss = make_test_function("gauss");
  const std::vector<double> zero{0.0};
  CHECK(btp_marginal(square, zero, 1.0) ==
        doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-10));
  for (double t : {0.1, 1.0, 2.5}) {
    for (double x : {-0.8, 0.0, 1.5}) {
      CAPTURE(t);
      CAPTURE(x);
      const std::vector<double> p{x};
      // E cos(x + W(|B_t|)) = cos x E exp(-|B_t|/2) = cos x exp(t/8) erfc(sqrt(t/8)).
      CHECK(btp_marginal(cosine, p, t) ==
            doctest::Approx(std::cos(x) * std::exp(t / 8) * std::erfc(std::sqrt(t / 8)))
                .epsilon(1e-10));
      const double ref = clock_average(t, [&](double s) { return gauss_semigroup_exact(s, x); });
      CHECK(btp_marginal(gauss, p, t) == doctest::Approx(ref).epsilon(1e-10));
      CHECK(btp_marginal(square, p, t) ==
            doctest::Approx(x * x + std::sqrt(2 * t / kPi)).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(btp_marginal(square, zero, 0.0), InvalidInput);
}

TEST_CASE("grid marginal equals the pointwise marginal") {
  const auto gauss = make_test_function("gauss");
  const std::vector<double> xs{-1.0, -0.5, 0.0, 0.25, 2.0}, ts{0.1, 0.4, 1.0};
  const auto grid = btp_marginal_grid(gauss, xs, ts);
  REQUIRE(grid.size() == xs.size() * ts.size());
  for (std::size_t j = 0; j < ts.size(); ++j) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const std::vector<double> p{xs[i]};
      CHECK(grid[j * xs.size() + i] == doctest::Approx(btp_marginal(gauss, p, ts[j])).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(btp_marginal_grid(gauss, xs, std::vector<double>{0.0}), InvalidInput);
  CHECK_THROWS_AS(btp_marginal_grid(make_test_function("harmonic2d", 2), xs, ts), InvalidInput);
}

TEST_CASE("test functions: analytic derivatives agree with finite differences") {
  for (const auto& name : test_function_names()) {
    const std::size_t dim = 2;
    const auto f = make_test_function(name, dim);
    const auto g = with_fd_derivatives(name + "-fd", dim, f.value, f.growth_degree);
    const std::vector<double> x{0.3, -0.7};
    CAPTURE(name);
    const auto ga = f.gradient(x), gn = g.gradient(x);
    const auto ha = f.hessian(x), hn = g.hessian(x);
    for (std::size_t i = 0; i < dim; ++i) CHECK(ga[i] == doctest::Approx(gn[i]).epsilon(1e-6));
    for (std::size_t i = 0; i < dim * dim; ++i) {
      CHECK(ha[i] == doctest::Approx(hn[i]).epsilon(1e-4).scale(1.0));
    }
    const auto gla = f.grad_laplacian(x), gln = g.grad_laplacian(x);
    for (std::size_t i = 0; i < dim; ++i) {
      CHECK(gla[i] == doctest::Approx(gln[i]).epsilon(1e-3).scale(1.0));
    }
    CHECK(f.bilaplacian(x) == doctest::Approx(g.bilaplacian(x)).epsilon(1e-2).scale(1.0));
  }
  const auto cube = make_test_function("cube");
  const std::vector<double> x{2.0};
  CHECK(cube(x) == 8.0);
  CHECK(cube.laplacian(x) == 12.0);
  const auto combo = linear_combination(2.0, cube, -1.0, make_test_function("square"));
  CHECK(combo(x) == 12.0);
  CHECK(combo.laplacian(x) == 22.0);
  CHECK_THROWS_AS(make_test_function("nope"), InvalidInput);
  CHECK_THROWS_AS(make_test_function("harmonic2d", 1), InvalidInput);
  CHECK_THROWS_AS(linear_combination(1, cube, 1, make_test_function("cube", 2)), InvalidInput);
}
