#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mspretest/mc_engine.hpp"

namespace mspretest {

// Which distribution generated a whole dataset: the one satisfying the MC
// test's assumptions (Theta) or the violating one (Q).
enum class Component { Theta, Q };

struct DecisionFlags {
  bool ms = false;
  bool mc = false;
  bool au = false;
  bool degenerate = false;

  bool combined() const { return ms ? au : mc; }
};

// Produces the three test decisions for one dataset drawn from `component`.
using DecisionSource = std::function<DecisionFlags(Component, RngStream&)>;

struct ComponentScenario {
  std::string label;
  DistributionSpec dist1;
  DistributionSpec dist2;

  bool operator==(const ComponentScenario&) const = default;
};

/// Two-step experiment: with probability lambda the whole dataset comes from
/// `theta`, otherwise from `q`.
struct MixtureSpec {
  std::string id;
  ComponentScenario theta;
  ComponentScenario q;
  std::size_t n1 = 20;
  std::size_t n2 = 30;
  std::vector<double> lambda_grid;  // strictly increasing, starts at 0, ends at 1
  std::size_t replicates = 20000;   // per lambda
  std::uint64_t master_seed = 1;
  ProcedureConfig procedure;

  static std::vector<double> default_grid();  // 0, 0.1, ..., 1

  // Throws DomainError naming the offending field.
  void validate() const;
  bool operator==(const MixtureSpec&) const = default;
};

/// Rates that enter the superiority lemma: main-test powers under both
/// components and the pretest's rejection rate under each.
struct LemmaInputs {
  double p_mc_theta = 0.0;
  double p_au_theta = 0.0;
  double p_mc_q = 0.0;
  double p_au_q = 0.0;
  double alpha_ms = 0.0;       // pretest rejection rate under Theta
  double alpha_ms_star = 0.0;  // pretest rejection rate under Q

  double delta_theta() const { return p_mc_theta - p_au_theta; }
  double delta_q() const { return p_au_q - p_mc_q; }
  bool operator==(const LemmaInputs&) const = default;
};

// (I) delta_theta > 0, (II) delta_q > 0, (III) alpha_ms_star > alpha_ms.
enum class Assumption { I, II, III };

std::string_view to_string(Assumption a);

class AssumptionViolation : public std::invalid_argument {
 public:
  AssumptionViolation(Assumption which, const std::string& what)
      : std::invalid_argument(what), which_(which) {}
  Assumption assumption() const { return which_; }

 private:
  Assumption which_;
};

// Crossing point delta_q / (delta_theta + delta_q) of the MC and AU curves.
// Throws AssumptionViolation if (I) or (II) fails.
Probability lambda_star(const LemmaInputs& inputs);

// Power curves as functions of lambda. The combined curve assumes the main
// tests' decisions are independent of the pretest's.
double analytic_mc_power(const LemmaInputs& inputs, double lambda);
double analytic_au_power(const LemmaInputs& inputs, double lambda);
double analytic_combined_power(const LemmaInputs& inputs, double lambda);

// Excess of the combined power over both main tests at lambda_star:
// delta_theta delta_q / (delta_theta + delta_q) * (alpha_ms_star - alpha_ms).
// Zero when alpha_ms_star == alpha_ms. Throws AssumptionViolation if (I) or
// (II) fails or alpha_ms_star < alpha_ms.
double lemma_gain(const LemmaInputs& inputs);

struct LemmaCurvePoint {
  double lambda = 0.0;
  double mc = 0.0;
  double au = 0.0;
  double combined = 0.0;
};

struct LemmaReport {
  LemmaInputs inputs;
  bool assumption_i = false;
  bool assumption_ii = false;
  bool assumption_iii = false;
  std::optional<double> lambda_star;
  std::optional<double> gain;
  // Open interval of lambda where the combined curve beats both main tests.
  std::optional<std::pair<double, double>> superior_interval;
  // |combined(lambda*) - max(mc, au)(lambda*) - gain|, when defined.
  std::optional<double> identity_residual;
  std::vector<LemmaCurvePoint> curve;

  std::vector<Assumption> failed_assumptions() const;
  bool gain_identity_holds(double tolerance = 1e-12) const;
};

LemmaReport verify_lemma(const LemmaInputs& inputs,
                         const std::vector<double>& grid = MixtureSpec::default_grid());

enum class MixtureProcedure { MC, AU, Combined };

inline constexpr std::array<MixtureProcedure, 3> kMixtureProcedures{
    MixtureProcedure::MC, MixtureProcedure::AU, MixtureProcedure::Combined};

std::string_view to_string(MixtureProcedure p);  // "mc", "au", "combined"

/// Decision counts for one component.
struct ComponentTally {
  std::uint64_t n = 0;
  std::uint64_t ms = 0;
  std::uint64_t mc = 0;
  std::uint64_t au = 0;
  std::uint64_t combined = 0;
  std::uint64_t mc_and_ms = 0;
  std::uint64_t au_and_ms = 0;

  void add(const DecisionFlags& f);
  bool operator==(const ComponentTally&) const = default;
};

struct MixturePoint {
  double lambda = 0.0;
  std::size_t replicates = 0;
  std::array<double, 3> power{};     // MC, AU, Combined
  std::array<double, 3> se{};
  std::array<double, 3> analytic{};  // from the sweep's lemma inputs
};

struct MixtureSweep {
  std::string id;
  std::uint64_t master_seed = 0;
  std::vector<MixturePoint> points;
  ComponentTally theta;
  ComponentTally q;
  LemmaInputs inputs;    // estimated from the tallies unless supplied
  std::optional<double> lambda_star;
  std::optional<double> gain;
};

// Real kernels (Shapiro-Wilk on residuals / Welch / WMW) on datasets drawn
// from the mixture's components.
DecisionSource kernel_decisions(const MixtureSpec& spec);

struct BernoulliRates {
  double ms = 0.0;
  double mc = 0.0;
  double au = 0.0;
};

// Independent Bernoulli decisions with the given rejection rates.
DecisionSource bernoulli_decisions(BernoulliRates theta, BernoulliRates q);

/// Replicate r at grid index i uses substream (i, r): its first uniform
/// selects Theta when below lambda, and the rest of the stream drives
/// `source`. The component tallies pool all grid points.
///
/// `known_inputs` replaces the estimated lemma inputs in the analytic curves.
MixtureSweep simulate_mixture_with(const DecisionSource& source, const std::string& id,
                                   const std::vector<double>& grid, std::size_t replicates,
                                   std::uint64_t master_seed, const RunOptions& options = {},
                                   std::optional<LemmaInputs> known_inputs = std::nullopt);

MixtureSweep simulate_mixture(const MixtureSpec& spec, const RunOptions& options = {});

// Lemma inputs implied by two component tallies.
LemmaInputs estimate_inputs(const ComponentTally& theta, const ComponentTally& q);

ComponentTally tally_from(const ScenarioResult& result);

/// |P(R | R_MS) - P(R | not R_MS)| with its standard error; the gap is
/// undetermined when either pretest branch has fewer than 100 replicates.
struct ConditionalGap {
  std::optional<double> gap;
  double se = 0.0;
  std::uint64_t ms_reject_count = 0;
  std::uint64_t ms_pass_count = 0;
};

ConditionalGap conditional_gap(std::uint64_t main_and_ms, std::uint64_t main_total,
                               std::uint64_t ms_total, std::uint64_t n);

struct IndependenceDiagnostics {
  ConditionalGap mc_theta;
  ConditionalGap au_theta;
  ConditionalGap mc_q;
  ConditionalGap au_q;
  std::optional<double> delta_max;  // over the determined gaps
};

IndependenceDiagnostics independence_diagnostics(const ComponentTally& theta, const ComponentTally& q);
IndependenceDiagnostics independence_diagnostics(const MixtureSweep& sweep);
// Runs both scenarios with the real kernels (Welch as MC, WMW as AU).
IndependenceDiagnostics independence_diagnostics(const ScenarioConfig& theta, const ScenarioConfig& q,
                                                 const RunOptions& options = {});
IndependenceDiagnostics independence_diagnostics(const DecisionSource& source, std::size_t replicates,
                                                 std::uint64_t master_seed,
                                                 const RunOptions& options = {});

}  // namespace mspretest
