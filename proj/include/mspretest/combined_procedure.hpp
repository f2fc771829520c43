#pragma once

#include <functional>
#include <string_view>

#include "mspretest/hypothesis_tests.hpp"

namespace mspretest {

/// Levels of the pretest and of the two main tests; both strictly inside (0, 1).
struct ProcedureConfig {
  Probability alpha_ms{0.05};
  Probability alpha{0.05};

  void validate() const;
  bool operator==(const ProcedureConfig&) const = default;
};

// Misspecification test on the whole dataset.
using MsKernel = std::function<TestOutcome(const TwoSampleData&, Probability)>;
// Main test; the stream feeds randomized kernels and is ignored otherwise.
using MainKernel = std::function<TestOutcome(const TwoSampleData&, Probability, RngStream&)>;

/// The three tests making up a combined procedure.
struct ProcedureKernels {
  MsKernel ms;
  MainKernel mc;
  MainKernel au;

  // Shapiro-Wilk on pooled residuals / Welch t / Wilcoxon-Mann-Whitney.
  static ProcedureKernels two_sample_default();
};

enum class Branch { MC, AU };

std::string_view to_string(Branch branch);

struct CombinedOutcome {
  TestOutcome ms;
  Branch branch = Branch::MC;
  TestOutcome main;

  bool reject() const { return main.reject; }
  bool operator==(const CombinedOutcome&) const = default;
};

// Shapiro-Wilk applied to the group-mean-centred residuals.
TestOutcome residual_normality_test(const TwoSampleData& data, Probability level);

/// Runs the pretest at alpha_ms; if it passes the MC test decides at alpha,
/// otherwise the AU test does.
CombinedOutcome run_combined(const TwoSampleData& data, const ProcedureConfig& config,
                             RngStream& stream,
                             const ProcedureKernels& kernels = ProcedureKernels::two_sample_default());

}  // namespace mspretest
