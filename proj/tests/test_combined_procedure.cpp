#include "doctest.h"

#include <vector>

#include "mspretest/combined_procedure.hpp"
#include "mspretest/distributions.hpp"

using namespace mspretest;

namespace {

// 19 standard normal quantiles Phi^-1(i / 20), i = 1..19, and one gross outlier.
const std::vector<double> kOutlierSample{
    -1.6448536269514729, -1.2815515655446004, -1.0364333894937898, -0.8416212335729142,
    -0.6744897501960817, -0.5244005127080409, -0.38532046640756773, -0.2533471031357997,
    -0.12566134685507402, 0.0, 0.12566134685507416, 0.2533471031357997,
    0.38532046640756773, 0.5244005127080407, 0.6744897501960817, 0.8416212335729143,
    1.0364333894937898, 1.2815515655446004, 1.6448536269514722, 50.0};

ProcedureConfig levels(double ms, double main) { return {Probability(ms), Probability(main)}; }

}  // namespace

TEST_CASE("pretest pass selects the MC branch") {
  auto stream = RngStream::derive(1, "combined", 0);
  const TwoSampleData d{{1, 2, 3}, {5, 6, 7}};
  const auto out = run_combined(d, ProcedureConfig{}, stream);
  CHECK_FALSE(out.ms.reject);
  CHECK(out.ms.p_value > 0.05);
  CHECK(out.branch == Branch::MC);
  CHECK(out.main.method == TestMethod::Welch);
  CHECK(out.reject() == welch_t_test(d, Probability(0.05)).reject);
}

TEST_CASE("outlier data selects the AU branch") {
  auto stream = RngStream::derive(1, "combined", 1);
  const TwoSampleData d{{kOutlierSample.begin(), kOutlierSample.begin() + 10},
                        {kOutlierSample.begin() + 10, kOutlierSample.end()}};
  const auto out = run_combined(d, ProcedureConfig{}, stream);
  CHECK(out.ms.reject);
  CHECK(out.ms.p_value < 0.01);
  CHECK(out.branch == Branch::AU);
  CHECK(out.main.method == TestMethod::Wmw);
}

TEST_CASE("identical groups are not rejected") {
  auto stream = RngStream::derive(1, "combined", 2);
  const TwoSampleData d{{0.3, 1.1, 2.0, 2.4}, {0.3, 1.1, 2.0, 2.4}};
  const auto out = run_combined(d, ProcedureConfig{}, stream);
  CHECK(out.branch == Branch::MC);
  CHECK_FALSE(out.reject());
}

TEST_CASE("degenerate data propagates") {
  auto stream = RngStream::derive(1, "combined", 3);
  CHECK_THROWS_AS(run_combined({{2, 2, 2}, {7, 7}}, ProcedureConfig{}, stream), DegenerateDataError);
  CHECK_THROWS_AS(run_combined({{1, 2}, {3, 4}}, levels(0.0, 0.05), stream), DomainError);
}

TEST_CASE("decomposition, determinism and branch monotonicity on random data") {
  auto source = RngStream::derive(2, "combined-random", 0);
  const auto dist1 = DistributionSpec::skew_normal(1.0, 3.0, 1.0);
  const auto dist2 = DistributionSpec::shifted_t(1.4, 3.0);
  const std::vector<double> ms_levels{0.2, 0.1, 0.05, 0.01, 0.001};
  const Probability alpha{0.05};
  int au_branches = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const TwoSampleData d{sample(dist1, 20, source), sample(dist2, 30, source)};
    auto s1 = RngStream::derive(3, "combined-run", static_cast<std::uint64_t>(rep));
    auto s2 = s1;
    const auto out = run_combined(d, ProcedureConfig{}, s1);
    REQUIRE(out == run_combined(d, ProcedureConfig{}, s2));

    const bool ms = residual_normality_test(d, Probability(0.05)).reject;
    const bool mc = welch_t_test(d, alpha).reject;
    const bool au = wmw_test(d, alpha).reject;
    const int expected = (1 - int(ms)) * int(mc) + int(ms) * int(au);
    REQUIRE(int(out.reject()) == expected);
    REQUIRE((out.branch == Branch::AU) == out.ms.reject);
    au_branches += out.branch == Branch::AU;

    if (rep % 20 == 0) {
      bool seen_mc = false;
      for (double level : ms_levels) {  // decreasing
        auto s = RngStream::derive(4, "combined-levels", 0);
        const auto o = run_combined(d, levels(level, 0.05), s);
        if (seen_mc) REQUIRE(o.branch == Branch::MC);
        seen_mc = seen_mc || o.branch == Branch::MC;
      }
    }
  }
  CHECK(au_branches > 1000);
  CHECK(au_branches < 9000);
}

TEST_CASE("kernels are configurable") {
  ProcedureKernels kernels = ProcedureKernels::two_sample_default();
  kernels.au = [](const TwoSampleData& d, Probability level, RngStream& s) {
    return permutation_mean_test(d, level, 499, s);
  };
  kernels.ms = [](const TwoSampleData&, Probability level) {
    return TestOutcome::make(0.0, Probability(0.0), level, TestMethod::Synthetic);
  };
  auto s = RngStream::derive(5, "custom", 0);
  const auto out = run_combined({{1, 2, 3}, {4, 5, 6}}, ProcedureConfig{}, s, kernels);
  CHECK(out.branch == Branch::AU);
  CHECK(out.main.method == TestMethod::Permutation);
  CHECK(out.main.p_value == doctest::Approx(0.1));  // exact: 2 of 20 splits
}
