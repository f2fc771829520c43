#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mspretest/distributions.hpp"
#include "mspretest/stat_kernels.hpp"

using namespace mspretest;

namespace {

template <typename F>
double simpson(F f, double lo, double hi, int panels = 200000) {
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

// Mean and variance of a skew normal by integrating its density.
Moments skew_normal_moments_by_quadrature(const SkewNormalParams& p) {
  auto density = [&](double x) {
    const double z = (x - p.xi) / p.omega;
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return 2.0 / p.omega * phi * 0.5 * std::erfc(-p.alpha * z / std::numbers::sqrt2);
  };
  const double lo = p.xi - 14.0 * p.omega;
  const double hi = p.xi + 14.0 * p.omega;
  const double mean = simpson([&](double x) { return x * density(x); }, lo, hi);
  const double var = simpson([&](double x) { return (x - mean) * (x - mean) * density(x); }, lo, hi);
  return {mean, var};
}

struct SampleMoments {
  double mean, var, m3, m4;
};

SampleMoments sample_moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  return {mean, m2 / (n - 1.0), m3 / n, m4 / n};
}

}  // namespace

TEST_CASE("skew normal parameterization") {
  SUBCASE("alpha 0 is the standard normal") {
    const auto p = skew_normal_params(0.0, 0.0, 1.0);
    CHECK(p.xi == doctest::Approx(0.0));
    CHECK(p.omega == doctest::Approx(1.0));
  }
  SUBCASE("alpha 3 matches the moment equations and quadrature") {
    const auto p = skew_normal_params(3.0, 1.0, 1.0);
    // delta = 3 / sqrt(10): omega = 1 / sqrt(1 - 1.8 / pi), xi = 1 - omega delta sqrt(2 / pi)
    CHECK(std::fabs(p.omega - 1.5302577956464851) < 1e-12);
    CHECK(std::fabs(p.xi - (1.0 - 1.158312963381158)) < 1e-12);
    CHECK(std::fabs(p.omega - 1.53027) < 5e-5);
    CHECK(std::fabs(p.xi - (1.0 - 1.15833)) < 5e-5);
    const Moments closed = moments(p);
    CHECK(std::fabs(closed.mean - 1.0) < 1e-12);
    CHECK(std::fabs(closed.variance - 1.0) < 1e-12);
    const Moments numeric = skew_normal_moments_by_quadrature(p);
    CHECK(std::fabs(numeric.mean - 1.0) < 1e-9);
    CHECK(std::fabs(numeric.variance - 1.0) < 1e-9);
  }
  SUBCASE("location equivariance") {
    const auto a = skew_normal_params(3.0, 1.0, 1.0);
    const auto b = skew_normal_params(3.0, 2.0, 1.0);
    CHECK(b.omega == a.omega);
    CHECK(b.xi == doctest::Approx(a.xi + 1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(skew_normal_params(3.0, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(skew_normal_params(3.0, 0.0, -1.0), DomainError);
}

TEST_CASE("closed-form moments") {
  const auto n = moments(DistributionSpec::normal(1.0, 1.0));
  CHECK(n.mean == 1.0);
  CHECK(n.variance == 1.0);
  const auto e = moments(DistributionSpec::exponential(2.0));
  CHECK(e.mean == 2.0);
  CHECK(e.variance == 4.0);
  const auto t = moments(DistributionSpec::shifted_t(1.0, 3.0));
  CHECK(t.mean == 1.0);
  CHECK(t.variance == 3.0);
  // t_3 variance by quadrature after x = sqrt(3) tan(theta)
  auto integrand = [](double theta) {
    const double x = std::sqrt(3.0) * std::tan(theta);
    const double density = 6.0 * std::sqrt(3.0) / (std::numbers::pi * (3.0 + x * x) * (3.0 + x * x));
    const double jacobian = std::sqrt(3.0) / (std::cos(theta) * std::cos(theta));
    return x * x * density * jacobian;
  };
  const double half = std::numbers::pi / 2.0;
  CHECK(std::fabs(simpson(integrand, -half + 1e-9, half - 1e-9) - t.variance) < 1e-6);
  const auto s = moments(DistributionSpec::skew_normal(2.0, 3.0, 1.0));
  CHECK(std::fabs(s.mean - 2.0) < 1e-12);
  CHECK(std::fabs(s.variance - 1.0) < 1e-12);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(DistributionSpec::exponential(0.0), DomainError);
  CHECK_THROWS_AS(DistributionSpec::exponential(-1.0), DomainError);
  CHECK_THROWS_AS(DistributionSpec::shifted_t(0.0, 2.0), DomainError);
  CHECK_THROWS_AS(DistributionSpec::normal(0.0, 0.0), DomainError);
  CHECK_THROWS_AS(DistributionSpec::skew_normal(0.0, 3.0, 0.0), DomainError);
  CHECK_NOTHROW(DistributionSpec::shifted_t(0.0, 2.5));
  CHECK(distribution_kind_from_string("skew_normal") == DistributionKind::SkewNormal);
  CHECK_THROWS_AS(distribution_kind_from_string("gamma"), DomainError);
}

TEST_CASE("sampling is deterministic given the stream") {
  const std::vector<DistributionSpec> specs{
      DistributionSpec::normal(1.0, 1.0), DistributionSpec::shifted_t(1.0, 3.0),
      DistributionSpec::shifted_t(1.0, 4.5), DistributionSpec::exponential(1.0),
      DistributionSpec::skew_normal(1.0, 3.0, 1.0)};
  for (const auto& spec : specs) {
    auto a = RngStream::derive(2024, "det", 1);
    auto b = RngStream::derive(2024, "det", 1);
    const auto va = sample(spec, 5, a);
    const auto vb = sample(spec, 5, b);
    CHECK(va.size() == 5);
    CHECK(va == vb);
  }
}

TEST_CASE("large-sample moments match the closed form") {
  constexpr std::size_t n = 1000000;
  const double nd = static_cast<double>(n);
  const std::vector<DistributionSpec> finite_kurtosis{
      DistributionSpec::normal(1.0, 1.0), DistributionSpec::exponential(1.0),
      DistributionSpec::exponential(2.0), DistributionSpec::skew_normal(1.0, 3.0, 1.0),
      DistributionSpec::skew_normal(2.0, -2.0, 4.0)};
  int index = 0;
  for (const auto& spec : finite_kurtosis) {
    auto stream = RngStream::derive(77, "moments", index++);
    const auto draws = sample(spec, n, stream);
    const auto m = sample_moments(draws);
    const auto truth = moments(spec);
    CAPTURE(to_string(spec.kind));
    CHECK(std::fabs(m.mean - truth.mean) <= 5.0 * std::sqrt(truth.variance / nd));
    const double var_se = std::sqrt((m.m4 - m.var * m.var) / nd);
    CHECK(std::fabs(m.var - truth.variance) <= 5.0 * var_se);
  }

  SUBCASE("normal mean within four standard errors") {
    auto stream = RngStream::derive(3, "lln", 0);
    const auto m = sample_moments(sample(DistributionSpec::normal(1.0, 1.0), n, stream));
    CHECK(std::fabs(m.mean - 1.0) <= 4.0 / std::sqrt(nd));
  }

  SUBCASE("t3: mean and distribution function") {
    // The fourth moment is infinite, so the variance has no usable standard
    // error; the distribution function is checked at fixed points instead.
    auto stream = RngStream::derive(5, "t3", 0);
    auto draws = sample(DistributionSpec::shifted_t(1.0, 3.0), n, stream);
    const auto m = sample_moments(draws);
    CHECK(std::fabs(m.mean - 1.0) <= 5.0 * std::sqrt(3.0 / nd));
    std::sort(draws.begin(), draws.end());
    for (double x : {-3.0, -1.0, 0.0, 0.5, 1.0, 2.2, 5.0}) {
      const double ecdf =
          static_cast<double>(std::upper_bound(draws.begin(), draws.end(), x) - draws.begin()) / nd;
      const double truth = student_t_cdf(x - 1.0, 3.0);
      CHECK(std::fabs(ecdf - truth) <= 5.0 * std::sqrt(truth * (1.0 - truth) / nd));
    }
  }

  SUBCASE("skew normal with positive shape has positive skewness") {
    auto stream = RngStream::derive(6, "skew", 0);
    const auto m = sample_moments(sample(DistributionSpec::skew_normal(1.0, 3.0, 1.0), n, stream));
    CHECK(m.m3 > 0.0);
  }
}
