#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mspretest/combined_procedure.hpp"
#include "mspretest/distributions.hpp"

namespace mspretest {

enum class Hypothesis { Null, Alternative };

std::string_view to_string(Hypothesis h);  // "null" / "alt"
Hypothesis hypothesis_from_string(std::string_view text);

enum class Procedure { Welch, Wmw, Combined, Permutation };

inline constexpr std::array<Procedure, 4> kProcedures{Procedure::Welch, Procedure::Wmw,
                                                      Procedure::Combined, Procedure::Permutation};

std::string_view to_string(Procedure p);    // "welch", "wmw", ...
std::string_view display_name(Procedure p);  // "Welch t", "WMW", ...
Procedure procedure_from_string(std::string_view text);

/// One simulated two-sample setting.
///
/// `id` names the scenario and keys its random substreams; `label` is the
/// distribution name used when pairing null and alternative rows in reports.
struct ScenarioConfig {
  std::string id;
  std::string label;
  Hypothesis hypothesis = Hypothesis::Null;
  DistributionSpec dist1;
  DistributionSpec dist2;
  std::size_t n1 = 20;
  std::size_t n2 = 30;
  std::size_t replicates = 20000;
  std::uint64_t master_seed = 1;
  ProcedureConfig procedure;
  std::size_t permutation_b = 999;
  PermutationMethod permutation_method = PermutationMethod::Resampling;

  // Throws DomainError naming the offending field.
  void validate() const;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Rejection rate of one procedure, overall and split by the pretest outcome.
/// Conditional rates are NaN when the branch received no replicates.
struct ProcedureRate {
  std::uint64_t rejections = 0;
  std::uint64_t rejections_given_ms_reject = 0;
  double rate = 0.0;
  double se = 0.0;
  double rate_given_ms_pass = 0.0;
  double rate_given_ms_reject = 0.0;
};

struct ScenarioResult {
  std::string scenario_id;
  std::string label;
  Hypothesis hypothesis = Hypothesis::Null;
  std::uint64_t master_seed = 0;
  std::size_t replicates_requested = 0;
  std::size_t replicates_used = 0;
  std::size_t degenerate = 0;
  std::uint64_t ms_rejections = 0;
  double ms_rejection_rate = 0.0;
  std::array<ProcedureRate, 4> procedures{};

  const ProcedureRate& operator[](Procedure p) const {
    return procedures[static_cast<std::size_t>(p)];
  }
  ProcedureRate& operator[](Procedure p) { return procedures[static_cast<std::size_t>(p)]; }

  // pass share * rate | pass + reject share * rate | reject, empty branches
  // contributing zero. Equals the unconditional rate up to rounding.
  double decomposed_rate(Procedure p) const;
};

// Per-replicate decision bits, as tallied by the engine.
struct ReplicateFlags {
  static constexpr std::uint8_t kMs = 1, kWelch = 2, kWmw = 4, kPermutation = 8,
                                kDegenerate = 128;
};

struct RunOptions {
  unsigned workers = 1;
  // Runs fail when more than this share of replicates is degenerate.
  double max_degenerate_share = 0.001;
};

// Substream scope of a scenario; replicate r uses derive(seed, scope, r).
std::string scenario_scope(const ScenarioConfig& config);

// Evaluates all four procedures on one dataset and returns ReplicateFlags
// bits. Degenerate data yields kDegenerate only.
std::uint8_t evaluate_replicate(const ScenarioConfig& config, RngStream& stream,
                                TwoSampleData& scratch);

// Tallies flag vectors into rates; used by the engine and by result merging.
ScenarioResult tally_replicates(const ScenarioConfig& config, std::span<const std::uint8_t> flags);

/// Runs `config.replicates` independent replicates. The result depends only
/// on the configuration, never on `options.workers`. Throws
/// DegenerateThresholdError if too many replicates are degenerate.
ScenarioResult simulate_scenario(const ScenarioConfig& config, const RunOptions& options = {});

enum class Tail { Greater, Less };

// Exact binomial tail: P(X >= k) for Greater, P(X <= k) for Less, X ~ Bin(n, p0).
// Computed by summing the probability mass away from the mode in log space.
Probability binomial_level_test(std::uint64_t rejections, std::uint64_t n, Probability p0, Tail side);

/// Rates and standard errors in procedure order (Welch, WMW, Combined, Permutation).
struct ProcedureRates {
  std::array<double, 4> rate{};
  std::array<double, 4> se{};
};

ProcedureRates rates_of(const ScenarioResult& result);

// Weighted average of rates; se = sqrt(sum w^2 se^2). Weights must be
// non-negative and sum to 1 within 1e-12 (DomainError otherwise).
ProcedureRates convex_combination(std::span<const std::pair<ProcedureRates, double>> weighted);

}  // namespace mspretest
