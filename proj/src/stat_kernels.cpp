#include "mspretest/stat_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mspretest {
namespace {

constexpr int kMaxFractionTerms = 300;
constexpr double kFractionTolerance = 1e-15;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b), Numerical Recipes' betacf arrangement.
double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxFractionTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kFractionTolerance) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Probability normal_cdf(double x) {
  return Probability(clamp01(0.5 * std::erfc(-x / std::numbers::sqrt2)));
}

Probability normal_sf(double x) {
  return Probability(clamp01(0.5 * std::erfc(x / std::numbers::sqrt2)));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile requires 0 < p < 1");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                  0.24178072517745061177) * r + 1.27045825245236838258) * r +
                3.64784832476320460504) * r + 5.7694972214606914055) * r +
              4.6303378461565452959) * r + 1.42343711074968357734) /
            (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                  0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                0.68976733498510000455) * r + 1.6763848301838038494) * r +
              2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                  0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                0.29656057182850489123) * r + 1.7848265399172913358) * r +
              5.4637849111641143699) * r + 6.6579046435011037772) /
            (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                  1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                0.0148753612908506148525) * r + 0.13692988092273580531) * r +
              0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

Probability regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("incomplete beta requires a > 0 and b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("incomplete beta requires x in [0, 1]");
  }
  if (x == 0.0) return Probability(0.0);
  if (x == 1.0) return Probability(1.0);
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return Probability(clamp01(front * beta_fraction(a, b, x) / a));
  }
  return Probability(clamp01(1.0 - front * beta_fraction(b, a, 1.0 - x) / b));
}

Probability student_t_two_sided(double x, double df) {
  if (!(df > 0.0)) throw DomainError("student t requires df > 0");
  if (std::isinf(x)) return Probability(0.0);
  const double t2 = x * x;
  // For small t^2/df use the complementary argument to keep precision.
  if (t2 < df) {
    const double z = t2 / (df + t2);
    return Probability(clamp01(1.0 - regularized_incomplete_beta(0.5, 0.5 * df, z)));
  }
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t2));
}

Probability student_t_cdf(double x, double df) {
  const double half_tail = 0.5 * student_t_two_sided(x, df);
  return Probability(x > 0.0 ? 1.0 - half_tail : half_tail);
}

}  // namespace mspretest
