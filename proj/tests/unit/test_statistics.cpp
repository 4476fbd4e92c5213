#include <cmath>
#include <numeric>
#include <vector>

#include "btp/errors.hpp"
#include "btp/random.hpp"
#include "btp/statistics.hpp"
#include "doctest.h"

using namespace btp;

namespace {

// Alternating series summed in long double, all terms kept.
double kolmogorov_reference(double lambda) {
  long double s = 0.0L;
  for (int k = 1; k <= 400; ++k) {
    const long double term = std::exp(-2.0L * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
  }
  return static_cast<double>(2.0L * s);
}

}  // namespace

TEST_CASE("splitmix64 matches the reference generator") {
  // First output of SplitMix64 seeded with 0.
  CHECK(mix64(0x9E3779B97F4A7C15ULL) == 0xE220A8397B1DCDAFULL);
  CHECK(derive(Seed{0}, 0).master == 0xE220A8397B1DCDAFULL);
  CHECK(derive(Seed{7}, 3) == derive(Seed{7}, 3));
  CHECK_FALSE(derive(Seed{7}, 3) == derive(Seed{7}, 4));
  CHECK_FALSE(derive(Seed{7}, Stream::inner) == derive(Seed{7}, Stream::outer));
}

TEST_CASE("Rng is reproducible and roughly standard normal") {
  Rng a(Seed{11}), b(Seed{11});
  for (int i = 0; i < 100; ++i) CHECK(a.gaussian() == b.gaussian());
  Rng r(Seed{12});
  std::vector<double> z(200000);
  for (double& v : z) v = r.gaussian();
  const Estimate e = estimate_mean(z);
  CHECK(std::abs(e.value) < 4 * e.std_error);
  CHECK(e.std_error * std::sqrt(200000.0) == doctest::Approx(1.0).epsilon(0.01));
  for (int i = 0; i < 1000; ++i) {
    const auto k = r.below(5);
    CHECK(k < 5);
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("pairwise sum agrees with a long double accumulation") {
  std::vector<double> xs(100001);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 1.0 / (1.0 + static_cast<double>(i)) - 1e-6;
  long double ref = 0.0L;
  for (double x : xs) ref += x;
  CHECK(pairwise_sum(xs) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-14));
  CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("estimate_mean uses the unbiased variance") {
  const std::vector<double> xs{1, 2, 3, 4};
  const Estimate e = estimate_mean(xs);
  CHECK(e.value == 2.5);
  // sample variance 5/3, stderr sqrt(5/12)
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(e.n == 4);
  CHECK(estimate_mean(std::vector<double>{3.0}).std_error == 0.0);
  CHECK_THROWS_AS(estimate_mean(std::vector<double>{}), InvalidInput);

  const std::vector<double> a{1, 5, 2}, b{0, 4, 1};
  const Estimate d = estimate_paired_difference(a, b);
  CHECK(d.value == 1.0);
  CHECK(d.std_error == 0.0);
  CHECK_THROWS_AS(estimate_paired_difference(a, std::vector<double>{1, 2}), InvalidInput);
}

TEST_CASE("summarize") {
  const auto z = summarize({1.75, 0.25, 100}, 1.0);
  CHECK(z.z == 3.0);
  CHECK(z.pass);
  CHECK_FALSE(summarize({1.75, 0.25, 100}, 1.0, 2.5).pass);
  CHECK(summarize({0.5, 0.25, 100}, 1.0).z == -2.0);
  CHECK(summarize({2.0, 0.0, 1}, 2.0).pass);
  CHECK_THROWS_AS(summarize({2.0, 0.0, 1}, 1.0), DegenerateStatistics);
}

TEST_CASE("Kolmogorov survival function on both sides of the series switch") {
  for (double lambda : {0.4, 0.6, 0.9, 1.17, 1.19, 1.36, 1.63, 2.5}) {
    CAPTURE(lambda);
    CHECK(kolmogorov_survival(lambda) == doctest::Approx(kolmogorov_reference(lambda)).epsilon(1e-9));
  }
  // Tabulated critical values.
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(kolmogorov_survival(0.0) == 1.0);
}

TEST_CASE("two-sample KS on separated and identical samples") {
  std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7};
  auto r = ks_two_sample(a, b);
  CHECK(r.statistic == 1.0);
  r = ks_two_sample(a, a);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
  // ties across samples are processed together
  r = ks_two_sample({1, 1, 2}, {1, 2, 2});
  CHECK(r.statistic == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(ks_two_sample({}, {1.0}), InvalidInput);
}

TEST_CASE("KS rejects about 5% of null comparisons at level 0.05") {
  int rejections = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive(Seed{2024}, r));
    std::vector<double> a(400), b(300);
    for (double& v : a) v = rng.gaussian();
    for (double& v : b) v = rng.gaussian();
    if (ks_two_sample(a, b).p_value < 0.05) ++rejections;
  }
  // Binomial(200, 0.05): mean 10, sd about 3.1.
  CHECK(rejections >= 2);
  CHECK(rejections <= 20);

  Rng rng(Seed{5});
  std::vector<double> a(2000), b(2000);
  for (double& v : a) v = rng.gaussian();
  for (double& v : b) v = 0.2 + rng.gaussian();
  CHECK(ks_two_sample(a, b).p_value < 1e-4);
}

TEST_CASE("weighted line fit") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7}, s{0.5, 0.5, 0.5, 0.5};
  const LineFit f = weighted_line_fit(x, y, s);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  // Equal sigma: se(slope) = sigma / sqrt(Sxx) with Sxx = sum (x - mean)^2 = 5.
  CHECK(f.slope_stderr == doctest::Approx(0.5 / std::sqrt(5.0)));

  // Weights pull the fit toward the precise points.
  const std::vector<double> y2{0, 1, 2, 10}, s2{0.01, 0.01, 0.01, 100};
  CHECK(weighted_line_fit(x, y2, s2).slope == doctest::Approx(1.0).epsilon(1e-3));

  CHECK_THROWS_AS(weighted_line_fit(std::vector<double>{1, 1}, std::vector<double>{0, 1},
                                    std::vector<double>{1, 1}),
                  InvalidInput);
  CHECK_THROWS_AS(weighted_line_fit(x, y, std::vector<double>{1, 1, 0, 1}), InvalidInput);
}
