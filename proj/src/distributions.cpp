#include "mspretest/distributions.hpp"

#include <cmath>
#include <numbers>

#include "mspretest/errors.hpp"

namespace mspretest {
namespace {

// Chi-square variate. Integer df: sum of squared normals. Otherwise
// 2 * Gamma(df / 2) by Marsaglia-Tsang.
double chi_square(double df, RngStream& stream) {
  if (df == std::floor(df) && df <= 64.0) {
    double sum = 0.0;
    for (int i = 0; i < static_cast<int>(df); ++i) {
      const double z = stream.normal();
      sum += z * z;
    }
    return sum;
  }
  double shape = 0.5 * df;
  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(stream.uniform(), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = stream.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return 2.0 * d * v * boost;
    }
  }
}

}  // namespace

std::string_view to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::Normal: return "normal";
    case DistributionKind::ShiftedT: return "shifted_t";
    case DistributionKind::Exponential: return "exponential";
    case DistributionKind::SkewNormal: return "skew_normal";
  }
  return "unknown";
}

DistributionKind distribution_kind_from_string(std::string_view name) {
  if (name == "normal") return DistributionKind::Normal;
  if (name == "shifted_t") return DistributionKind::ShiftedT;
  if (name == "exponential") return DistributionKind::Exponential;
  if (name == "skew_normal") return DistributionKind::SkewNormal;
  throw DomainError("unknown distribution kind '" + std::string(name) + "'");
}

DistributionSpec DistributionSpec::normal(double mu, double sigma) {
  DistributionSpec s;
  s.kind = DistributionKind::Normal;
  s.mu = mu;
  s.sigma = sigma;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::shifted_t(double mu, double df) {
  DistributionSpec s;
  s.kind = DistributionKind::ShiftedT;
  s.mu = mu;
  s.df = df;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::exponential(double mu) {
  DistributionSpec s;
  s.kind = DistributionKind::Exponential;
  s.mu = mu;
  s.validate();
  return s;
}

DistributionSpec DistributionSpec::skew_normal(double mu, double shape, double variance) {
  DistributionSpec s;
  s.kind = DistributionKind::SkewNormal;
  s.mu = mu;
  s.shape = shape;
  s.variance = variance;
  s.validate();
  return s;
}

void DistributionSpec::validate() const {
  if (!std::isfinite(mu)) throw DomainError("mu must be finite");
  switch (kind) {
    case DistributionKind::Normal:
      if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be > 0");
      break;
    case DistributionKind::ShiftedT:
      if (!(df > 2.0) || !std::isfinite(df)) throw DomainError("df must be > 2");
      break;
    case DistributionKind::Exponential:
      if (!(mu > 0.0)) throw DomainError("mu must be > 0 for exponential");
      break;
    case DistributionKind::SkewNormal:
      if (!std::isfinite(shape)) throw DomainError("shape must be finite");
      if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw DomainError("variance must be > 0");
      }
      break;
  }
}

double SkewNormalParams::delta() const { return alpha / std::sqrt(1.0 + alpha * alpha); }

SkewNormalParams skew_normal_params(double alpha, double target_mean, double target_var) {
  if (!(target_var > 0.0)) throw DomainError("skew normal target variance must be > 0");
  if (!std::isfinite(alpha)) throw DomainError("skew normal shape must be finite");
  const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
  const double var_factor = 1.0 - 2.0 * delta * delta / std::numbers::pi;
  const double omega = std::sqrt(target_var / var_factor);
  const double xi = target_mean - omega * delta * std::sqrt(2.0 / std::numbers::pi);
  return {xi, omega, alpha};
}

Moments moments(const SkewNormalParams& p) {
  const double delta = p.delta();
  return {p.xi + p.omega * delta * std::sqrt(2.0 / std::numbers::pi),
          p.omega * p.omega * (1.0 - 2.0 * delta * delta / std::numbers::pi)};
}

Moments moments(const DistributionSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case DistributionKind::Normal: return {spec.mu, spec.sigma * spec.sigma};
    case DistributionKind::ShiftedT: return {spec.mu, spec.df / (spec.df - 2.0)};
    case DistributionKind::Exponential: return {spec.mu, spec.mu * spec.mu};
    case DistributionKind::SkewNormal:
      return moments(skew_normal_params(spec.shape, spec.mu, spec.variance));
  }
  return {};
}

void sample_into(const DistributionSpec& spec, std::size_t n, RngStream& stream,
                 std::vector<double>& out) {
  out.reserve(out.size() + n);
  switch (spec.kind) {
    case DistributionKind::Normal:
      for (std::size_t i = 0; i < n; ++i) out.push_back(spec.mu + spec.sigma * stream.normal());
      break;
    case DistributionKind::ShiftedT:
      for (std::size_t i = 0; i < n; ++i) {
        const double z = stream.normal();
        const double chi2 = chi_square(spec.df, stream);
        out.push_back(spec.mu + z / std::sqrt(chi2 / spec.df));
      }
      break;
    case DistributionKind::Exponential:
      for (std::size_t i = 0; i < n; ++i) out.push_back(-spec.mu * std::log(stream.uniform()));
      break;
    case DistributionKind::SkewNormal: {
      const SkewNormalParams p = skew_normal_params(spec.shape, spec.mu, spec.variance);
      const double delta = p.delta();
      const double complement = std::sqrt(1.0 - delta * delta);
      for (std::size_t i = 0; i < n; ++i) {
        const double z0 = stream.normal();
        const double z1 = stream.normal();
        out.push_back(p.xi + p.omega * (delta * std::fabs(z0) + complement * z1));
      }
      break;
    }
  }
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t n, RngStream& stream) {
  spec.validate();
  std::vector<double> out;
  sample_into(spec, n, stream, out);
  return out;
}

}  // namespace mspretest
