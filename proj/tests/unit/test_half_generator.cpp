#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "btp/errors.hpp"
#include "btp/half_generator.hpp"
#include "doctest.h"

using namespace btp;

namespace {

const double kPi = std::numbers::pi;

// (1/sqrt(2 pi)) [f''(xi) + (x0 - xi) f'(xi) E(1/Y)], where Y has density
// proportional to 2 N(0, s)(y) N(x0, y)(xi) on (0, inf): the clock value
// given the observation.
double reference(double s, double xi, double x0, double f1, double f2) {
  boost::math::quadrature::exp_sinh<double> q;
  auto w = [&](double y) {
    const double clock = 2.0 * std::exp(-y * y / (2 * s)) / std::sqrt(2 * kPi * s);
    const double obs = std::exp(-(xi - x0) * (xi - x0) / (2 * y)) / std::sqrt(2 * kPi * y);
    return clock * obs;
  };
  const double d = q.integrate(w);
  const double n = q.integrate([&](double y) { return w(y) / y; });
  return (f2 + (x0 - xi) * f1 * n / d) / std::sqrt(2 * kPi);
}

HalfGenQuery query(const char* f, double xi, double x0 = 0.0, double s = 1.0) {
  return {s, xi, x0, make_test_function(f)};
}

}  // namespace

TEST_CASE("reversed generator of Brownian motion") {
  const auto cube = make_test_function("cube");
  // f'' / 2 + (x0 - xi)/y f' at xi = 1, x0 = 0, y = 2: 3 - 1.5
  CHECK(reversed_generator(cube, 2.0, 1.0, 0.0) == doctest::Approx(3.0 - 1.5));
  CHECK(reversed_generator(cube, 2.0, 0.5, 0.5) == doctest::Approx(1.5));
  CHECK_THROWS_AS(reversed_generator(cube, 0.0, 1.0, 0.0), InvalidInput);
}

TEST_CASE("half-derivative quadrature at xi = x0") {
  CHECK(halfgen_quadrature(query("square", 0.0)) ==
        doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-12));
  // Only f''(xi) enters when the drift vanishes: cube at 0.7 has f'' = 4.2.
  CHECK(halfgen_quadrature(query("cube", 0.7, 0.7)) ==
        doctest::Approx(4.2 / std::sqrt(2 * kPi)).epsilon(1e-12));
  CHECK(halfgen_quadrature(query("linear", 0.3, 0.3)) == 0.0);
}

TEST_CASE("half-derivative quadrature against an independent integration") {
  for (double s : {0.5, 1.0, 2.0}) {
    for (double xi : {-1.5, 0.4, 1.0}) {
      for (double x0 : {0.0, 0.3}) {
        CAPTURE(s);
        CAPTURE(xi);
        CAPTURE(x0);
        // linear: f' = 1, f'' = 0; cube: f' = 3 xi^2, f'' = 6 xi
        CHECK(halfgen_quadrature(query("linear", xi, x0, s)) ==
              doctest::Approx(reference(s, xi, x0, 1.0, 0.0)).epsilon(1e-9));
        CHECK(halfgen_quadrature(query("cube", xi, x0, s)) ==
              doctest::Approx(reference(s, xi, x0, 3 * xi * xi, 6 * xi)).epsilon(1e-9));
      }
    }
  }
  CHECK_THROWS_AS(halfgen_quadrature(query("square", 0.0, 0.0, 0.0)), InvalidInput);
  CHECK_THROWS_AS(halfgen_quadrature({1.0, 0.0, 0.0, make_test_function("harmonic2d", 2)}),
                  InvalidInput);
}

TEST_CASE("Monte Carlo half-derivative agrees with quadrature") {
  const std::vector<double> deltas{0.01, 0.003, 0.001, 0.0003, 0.0001};
  for (const auto& q : {query("square", 0.0), query("linear", 1.0)}) {
    const double exact = halfgen_quadrature(q);
    const auto r = halfgen_mc(q, deltas, 400000, 0.05, Seed{17});
    CAPTURE(q.f.name);
    CAPTURE(r.estimate.value);
    CAPTURE(r.estimate.std_error);
    REQUIRE(r.quotients.size() == deltas.size());
    CHECK(r.estimate.std_error > 0.0);
    const double err = std::abs(r.estimate.value - exact);
    CHECK((err <= 4 * r.estimate.std_error || err <= 0.1 * std::abs(exact)));
    for (double ess : r.effective_samples) CHECK(ess > 100.0);
  }
}

TEST_CASE("sampled and integrated outer increments estimate the same quotient") {
  const auto q = query("square", 0.0);
  const std::vector<double> deltas{0.01, 0.005, 0.0025};
  HalfGenMcOptions sampled;
  sampled.integrate_outer_increment = false;
  const auto a = halfgen_mc(q, deltas, 400000, 0.05, Seed{3});
  const auto b = halfgen_mc(q, deltas, 400000, 0.05, Seed{4}, sampled);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double se = std::hypot(a.quotient_stderr[i], b.quotient_stderr[i]);
    CHECK(std::abs(a.quotients[i] - b.quotients[i]) < 4 * se);
    // integrating the increment removes variance
    CHECK(a.quotient_stderr[i] < b.quotient_stderr[i]);
  }
}

TEST_CASE("halfgen_mc is reproducible and validates its input") {
  const auto q = query("square", 0.0);
  const std::vector<double> deltas{0.01, 0.003, 0.001};
  const auto a = halfgen_mc(q, deltas, 20000, 0.1, Seed{8});
  const auto b = halfgen_mc(q, deltas, 20000, 0.1, Seed{8});
  CHECK(a.estimate.value == b.estimate.value);
  CHECK(a.estimate.std_error == b.estimate.std_error);
  CHECK(a.quotients == b.quotients);

  CHECK_THROWS_AS(halfgen_mc(q, {0.01, 0.001}, 20000, 0.1, Seed{1}), InvalidInput);
  CHECK_THROWS_AS(halfgen_mc(q, {0.01, 0.01, 0.001}, 20000, 0.1, Seed{1}), InvalidInput);
  CHECK_THROWS_AS(halfgen_mc(q, {2.0, 0.01, 0.001}, 20000, 0.1, Seed{1}), InvalidInput);
  CHECK_THROWS_AS(halfgen_mc(q, deltas, 20000, 0.0, Seed{1}), InvalidInput);
  CHECK_THROWS_AS(halfgen_mc(q, deltas, 10, 0.1, Seed{1}), InvalidInput);
  // Far in the tail nothing lands in the kernel window.
  CHECK_THROWS_AS(halfgen_mc(query("square", 8.0), deltas, 20000, 0.01, Seed{1}), InsufficientData);
}
