#include "doctest.h"

#include <cmath>
#include <numbers>

#include "mspretest/stat_kernels.hpp"

using namespace mspretest;

namespace {

// Composite Simpson rule for the standard normal density on [0, x].
double normal_cdf_by_quadrature(double x) {
  const int panels = 20000;
  const double h = x / panels;
  auto f = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  double s = f(0.0) + f(x);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return 0.5 + s * h / 3.0;
}

}  // namespace

TEST_CASE("normal_cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(std::fabs(normal_cdf(1.959964) - 0.975) < 1e-6);
  for (double x : {-3.1, -0.7, 0.25, 1.959964, 2.8}) {
    CHECK(std::fabs(normal_cdf(x) - normal_cdf_by_quadrature(x)) < 1e-12);
    CHECK(std::fabs(normal_cdf(x) + normal_cdf(-x) - 1.0) < 1e-15);
    CHECK(std::fabs(normal_sf(x) - normal_cdf(-x)) < 1e-16);
  }
}

TEST_CASE("normal_quantile") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(std::fabs(normal_quantile(0.975) - 1.959964) < 1e-5);
  // scipy.special.ndtri reference values
  CHECK(std::fabs(normal_quantile(0.975) - 1.959963984540054) < 1e-13);
  CHECK(std::fabs(normal_quantile(1e-10) - -6.361340902404056) < 1e-11);
  CHECK(std::fabs(normal_quantile(0.3) - -0.5244005127080409) < 1e-14);
  for (double p : {0.001, 0.02, 0.3, 0.61, 0.9, 0.999}) {
    CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("quantile and cdf round trip") {
  for (double p = 0.001; p <= 0.999; p += 0.0005) {
    CHECK(std::fabs(normal_cdf(normal_quantile(p)) - p) <= 1e-10);
  }
  for (double p = 1e-300; p < 0.01; p *= 10.0) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("regularized_incomplete_beta") {
  CHECK(std::fabs(regularized_incomplete_beta(1, 1, 0.3) - 0.3) < 1e-12);
  CHECK(std::fabs(regularized_incomplete_beta(2.5, 2.5, 0.5) - 0.5) < 1e-12);
  // closed form 6x^2 - 8x^3 + 3x^4 for a = 2, b = 3
  const double x = 0.25;
  CHECK(std::fabs(regularized_incomplete_beta(2, 3, x) -
                  (6 * x * x - 8 * x * x * x + 3 * x * x * x * x)) < 1e-12);
  CHECK(std::fabs(regularized_incomplete_beta(2, 3, x) - 0.26171875) < 1e-12);
  // scipy.special.betainc reference values
  CHECK(std::fabs(regularized_incomplete_beta(0.5, 24.0, 0.2) - 0.99887033296311) < 1e-12);
  CHECK(std::fabs(regularized_incomplete_beta(30.5, 0.5, 0.9) - 0.011573961337151814) < 1e-12);
  CHECK(regularized_incomplete_beta(3, 4, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(3, 4, 1.0) == 1.0);
  CHECK_THROWS_AS(regularized_incomplete_beta(1, 1, 1.5), DomainError);
  CHECK_THROWS_AS(regularized_incomplete_beta(1, 1, -0.1), DomainError);
  CHECK_THROWS_AS(regularized_incomplete_beta(0, 1, 0.5), DomainError);
}

TEST_CASE("student_t_cdf") {
  CHECK(student_t_cdf(0.0, 3.0) == 0.5);
  CHECK(student_t_cdf(0.0, 2.94) == 0.5);
  CHECK(std::fabs(student_t_cdf(1.0, 1.0) - (0.5 + std::atan(1.0) / std::numbers::pi)) < 1e-10);
  CHECK(std::fabs(student_t_cdf(1.96, 1e6) - normal_cdf(1.96)) < 1e-4);
  CHECK(std::fabs(student_t_cdf(1.96, 1e6) - 0.975) < 1e-4);
  // scipy.stats.t.cdf reference values
  CHECK(std::fabs(student_t_cdf(-2.5, 2.94117647) - 0.04469660471700577) < 1e-10);
  CHECK(std::fabs(student_t_cdf(0.7, 7.3) - 0.7471914299068707) < 1e-10);
  // Cauchy closed form over a grid
  for (double x = -20.0; x <= 20.0; x += 0.37) {
    CHECK(std::fabs(student_t_cdf(x, 1.0) - (0.5 + std::atan(x) / std::numbers::pi)) < 1e-10);
  }
}

TEST_CASE("t distribution approaches the normal") {
  double worst = 0.0;
  for (double x = -5.0; x <= 5.0; x += 0.01) {
    worst = std::max(worst, std::fabs(student_t_cdf(x, 1e6) - normal_cdf(x)));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("distribution functions are monotone") {
  double prev_n = 0.0, prev_t = 0.0, prev_b = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.001) {
    const double n = normal_cdf(x);
    const double t = student_t_cdf(x, 4.5);
    CHECK(n >= prev_n);
    CHECK(t >= prev_t);
    prev_n = n;
    prev_t = t;
  }
  for (double x = 0.0; x <= 1.0; x += 0.0005) {
    const double b = regularized_incomplete_beta(3.5, 0.8, x);
    CHECK(b >= prev_b);
    prev_b = b;
  }
}

TEST_CASE("probability type rejects values outside the unit interval") {
  CHECK_THROWS_AS(Probability(1.5), DomainError);
  CHECK_THROWS_AS(Probability(-0.1), DomainError);
  CHECK_THROWS_AS(Probability(std::nan("")), DomainError);
  CHECK(Probability(0.25).value() == 0.25);
}
