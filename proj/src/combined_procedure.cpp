#include "mspretest/combined_procedure.hpp"

namespace mspretest {

void ProcedureConfig::validate() const {
  if (!(alpha_ms > 0.0 && alpha_ms < 1.0)) throw DomainError("alpha_ms must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

std::string_view to_string(Branch branch) { return branch == Branch::MC ? "MC" : "AU"; }

TestOutcome residual_normality_test(const TwoSampleData& data, Probability level) {
  return shapiro_wilk(pooled_residuals(data), level);
}

ProcedureKernels ProcedureKernels::two_sample_default() {
  return {residual_normality_test,
          [](const TwoSampleData& d, Probability level, RngStream&) { return welch_t_test(d, level); },
          [](const TwoSampleData& d, Probability level, RngStream&) { return wmw_test(d, level); }};
}

CombinedOutcome run_combined(const TwoSampleData& data, const ProcedureConfig& config,
                             RngStream& stream, const ProcedureKernels& kernels) {
  config.validate();
  CombinedOutcome out;
  out.ms = kernels.ms(data, config.alpha_ms);
  if (out.ms.reject) {
    out.branch = Branch::AU;
    out.main = kernels.au(data, config.alpha, stream);
  } else {
    out.branch = Branch::MC;
    out.main = kernels.mc(data, config.alpha, stream);
  }
  return out;
}

}  // namespace mspretest
