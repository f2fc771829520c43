#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mspretest/rng.hpp"

namespace mspretest {

enum class DistributionKind { Normal, ShiftedT, Exponential, SkewNormal };

std::string_view to_string(DistributionKind kind);
// Throws DomainError for unknown names.
DistributionKind distribution_kind_from_string(std::string_view name);

/// Data-generating distribution parameterized by its expected value.
///
/// Fields that do not apply to `kind` are ignored: `sigma` for Normal, `df`
/// for ShiftedT (t_df shifted by mu), `shape` and `variance` for SkewNormal.
/// Exponential is parameterized by its mean alone.
struct DistributionSpec {
  DistributionKind kind = DistributionKind::Normal;
  double mu = 0.0;
  double sigma = 1.0;
  double df = 3.0;
  double shape = 0.0;
  double variance = 1.0;

  static DistributionSpec normal(double mu, double sigma);
  static DistributionSpec shifted_t(double mu, double df);
  static DistributionSpec exponential(double mu);
  static DistributionSpec skew_normal(double mu, double shape, double variance);

  // Throws DomainError naming the offending field.
  void validate() const;

  bool operator==(const DistributionSpec&) const = default;
};

struct SkewNormalParams {
  double xi = 0.0;     // location
  double omega = 1.0;  // scale
  double alpha = 0.0;  // shape

  double delta() const;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Location/scale of the skew normal with the given shape, mean and variance.
SkewNormalParams skew_normal_params(double alpha, double target_mean, double target_var);

Moments moments(const SkewNormalParams& params);
Moments moments(const DistributionSpec& spec);

// n independent draws. Deterministic given the stream state.
std::vector<double> sample(const DistributionSpec& spec, std::size_t n, RngStream& stream);

// Appends n draws to `out`; avoids reallocation in simulation loops.
void sample_into(const DistributionSpec& spec, std::size_t n, RngStream& stream,
                 std::vector<double>& out);

}  // namespace mspretest
