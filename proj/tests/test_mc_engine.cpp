#include "doctest.h"

#include <cmath>
#include <vector>

#include "mspretest/mc_engine.hpp"
#include "mspretest/stat_kernels.hpp"

using namespace mspretest;

namespace {

ScenarioConfig small_scenario(std::size_t replicates) {
  ScenarioConfig c;
  c.id = "skew-alt";
  c.label = "skew normal";
  c.hypothesis = Hypothesis::Alternative;
  c.dist1 = DistributionSpec::skew_normal(1.0, 3.0, 1.0);
  c.dist2 = DistributionSpec::skew_normal(1.5, 3.0, 1.0);
  c.replicates = replicates;
  c.master_seed = 99;
  c.permutation_b = 199;
  return c;
}

void check_same(const ScenarioResult& a, const ScenarioResult& b) {
  CHECK(a.replicates_used == b.replicates_used);
  CHECK(a.ms_rejections == b.ms_rejections);
  for (Procedure p : kProcedures) {
    CHECK(a[p].rejections == b[p].rejections);
    CHECK(a[p].rejections_given_ms_reject == b[p].rejections_given_ms_reject);
    CHECK(a[p].rate == b[p].rate);
  }
}

}  // namespace

TEST_CASE("single replicate runs are deterministic") {
  const auto config = small_scenario(1);
  const auto a = simulate_scenario(config);
  const auto b = simulate_scenario(config);
  check_same(a, b);
  for (Procedure p : kProcedures) {
    CHECK((a[p].rate == 0.0 || a[p].rate == 1.0));
  }
}

TEST_CASE("results do not depend on the worker count") {
  const auto config = small_scenario(1500);
  const auto one = simulate_scenario(config, {.workers = 1});
  const auto three = simulate_scenario(config, {.workers = 3});
  const auto eight = simulate_scenario(config, {.workers = 8});
  check_same(one, three);
  check_same(one, eight);
}

TEST_CASE("conditional rates decompose the unconditional rate") {
  const auto r = simulate_scenario(small_scenario(2000), {.workers = 2});
  CHECK(r.replicates_used == 2000);
  CHECK(r.ms_rejections > 0);
  CHECK(r.ms_rejections < 2000);
  for (Procedure p : kProcedures) {
    CAPTURE(to_string(p));
    CHECK(std::fabs(r[p].rate - r.decomposed_rate(p)) <= 1e-12);
    CHECK(r[p].se == doctest::Approx(std::sqrt(r[p].rate * (1 - r[p].rate) / 2000.0)));
    CHECK(r[p].rate >= 0.0);
    CHECK(r[p].rate <= 1.0);
  }
  // the combined procedure is the AU test whenever the pretest rejects
  CHECK(r[Procedure::Combined].rate_given_ms_reject == r[Procedure::Wmw].rate_given_ms_reject);
  CHECK(r[Procedure::Combined].rate_given_ms_pass == r[Procedure::Welch].rate_given_ms_pass);
}

TEST_CASE("tallying handles empty branches and degenerate replicates") {
  const auto config = small_scenario(4);
  using F = ReplicateFlags;
  const std::vector<std::uint8_t> flags{F::kWelch, F::kWelch | F::kWmw, 0, F::kDegenerate};
  const auto r = tally_replicates(config, flags);
  CHECK(r.replicates_used == 3);
  CHECK(r.degenerate == 1);
  CHECK(r.ms_rejections == 0);
  CHECK(std::isnan(r[Procedure::Welch].rate_given_ms_reject));
  CHECK(r[Procedure::Welch].rate == doctest::Approx(2.0 / 3.0));
  CHECK(r[Procedure::Combined].rate == doctest::Approx(2.0 / 3.0));
  CHECK(r[Procedure::Wmw].rate == doctest::Approx(1.0 / 3.0));
  CHECK(r.decomposed_rate(Procedure::Welch) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("degenerate data beyond the threshold fails the run") {
  auto config = small_scenario(50);
  config.dist1 = DistributionSpec::normal(1.0, 1e-300);
  config.dist2 = DistributionSpec::normal(1.0, 1e-300);
  CHECK_THROWS_AS(simulate_scenario(config), DegenerateThresholdError);
}

TEST_CASE("scenario validation") {
  auto c = small_scenario(10);
  c.n1 = 2;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = small_scenario(0);
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = small_scenario(10);
  c.procedure.alpha = Probability(1.0);
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("binomial level test") {
  // scipy.stats.binom.sf reference values
  const double at_nominal = binomial_level_test(5000, 100000, Probability(0.05), Tail::Greater);
  CHECK(std::fabs(at_nominal - 0.5020259614598019) < 1e-9);
  CHECK(std::fabs(at_nominal - 0.504) < 0.005);
  const double combined = binomial_level_test(5120, 100000, Probability(0.05), Tail::Greater);
  CHECK(combined > 0.01);
  CHECK(combined < 0.05);
  CHECK(std::fabs(combined - 0.0418529191942423) < 1e-9);
  CHECK(std::fabs(binomial_level_test(0, 10, Probability(0.05), Tail::Less) - std::pow(0.95, 10)) < 1e-14);
  CHECK(binomial_level_test(0, 10, Probability(0.05), Tail::Greater) == 1.0);
  CHECK_THROWS_AS(binomial_level_test(11, 10, Probability(0.05), Tail::Less), DomainError);

  SUBCASE("agrees with the incomplete beta representation") {
    // P(X >= k) = I_p(k, n - k + 1)
    for (std::uint64_t n : {10u, 57u, 400u}) {
      for (std::uint64_t k = 1; k <= n; k += 1 + n / 13) {
        for (double p : {0.05, 0.3, 0.77}) {
          const double beta = regularized_incomplete_beta(double(k), double(n - k + 1), p);
          CHECK(binomial_level_test(k, n, Probability(p), Tail::Greater) ==
                doctest::Approx(beta).epsilon(1e-9));
          CHECK(binomial_level_test(k - 1, n, Probability(p), Tail::Less) ==
                doctest::Approx(1.0 - beta).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("convex combination") {
  ProcedureRates a{{0.1, 0.2, 0.3, 0.4}, {0.01, 0.02, 0.03, 0.04}};
  ProcedureRates b{{0.5, 0.6, 0.7, 0.8}, {0.02, 0.02, 0.02, 0.02}};
  SUBCASE("single weight is the identity") {
    const std::vector<std::pair<ProcedureRates, double>> w{{a, 1.0}};
    const auto c = convex_combination(w);
    CHECK(c.rate == a.rate);
    CHECK(c.se == a.se);
  }
  SUBCASE("identical inputs") {
    const std::vector<std::pair<ProcedureRates, double>> w{{a, 0.3}, {a, 0.7}};
    const auto c = convex_combination(w);
    for (int i = 0; i < 4; ++i) CHECK(c.rate[i] == doctest::Approx(a.rate[i]).epsilon(1e-15));
  }
  SUBCASE("standard errors combine in quadrature") {
    const std::vector<std::pair<ProcedureRates, double>> w{{a, 0.5}, {b, 0.5}};
    const auto c = convex_combination(w);
    CHECK(c.rate[0] == doctest::Approx(0.3));
    CHECK(c.se[0] == doctest::Approx(std::sqrt(0.25 * 1e-4 + 0.25 * 4e-4)));
  }
  SUBCASE("weights must sum to one") {
    const std::vector<std::pair<ProcedureRates, double>> w{{a, 0.5}, {b, 0.4}};
    CHECK_THROWS_AS(convex_combination(w), DomainError);
    const std::vector<std::pair<ProcedureRates, double>> neg{{a, 1.5}, {b, -0.5}};
    CHECK_THROWS_AS(convex_combination(neg), DomainError);
  }
}
