#pragma once

#include <cmath>

#include "mspretest/errors.hpp"

namespace mspretest {

/// A real number in [0, 1]. Construction validates the range; NaN is rejected.
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw DomainError("probability outside [0, 1]");
    }
  }

  constexpr double value() const { return value_; }
  constexpr operator double() const { return value_; }  // NOLINT: value-like

  friend constexpr bool operator==(Probability, Probability) = default;

 private:
  double value_ = 0.0;
};

// Standard normal distribution function.
Probability normal_cdf(double x);

// Upper tail 1 - Phi(x), evaluated without cancellation.
Probability normal_sf(double x);

// Inverse of normal_cdf (Wichura's AS 241). Throws DomainError unless 0 < p < 1.
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
// Throws DomainError for a, b <= 0 or x outside [0, 1] and NumericError when
// the fraction fails to converge within 300 terms.
Probability regularized_incomplete_beta(double a, double b, double x);

// Student t distribution function for real-valued degrees of freedom.
Probability student_t_cdf(double x, double df);

// P(|T| >= |x|) for T ~ t(df).
Probability student_t_two_sided(double x, double df);

}  // namespace mspretest
