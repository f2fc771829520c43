#include "mspretest/mc_engine.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "mspretest/errors.hpp"
#include "mspretest/parallel.hpp"

namespace mspretest {
namespace {

double conditional(std::uint64_t hits, std::uint64_t n) {
  return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                : static_cast<double>(hits) / static_cast<double>(n);
}

bool procedure_rejects(std::uint8_t flags, Procedure p) {
  switch (p) {
    case Procedure::Welch: return flags & ReplicateFlags::kWelch;
    case Procedure::Wmw: return flags & ReplicateFlags::kWmw;
    case Procedure::Combined:
      return (flags & ReplicateFlags::kMs) ? (flags & ReplicateFlags::kWmw)
                                           : (flags & ReplicateFlags::kWelch);
    case Procedure::Permutation: return flags & ReplicateFlags::kPermutation;
  }
  return false;
}

}  // namespace

unsigned default_worker_count() {
  if (const char* env = std::getenv("MSPRETEST_WORKERS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string_view to_string(Hypothesis h) { return h == Hypothesis::Null ? "null" : "alt"; }

Hypothesis hypothesis_from_string(std::string_view text) {
  if (text == "null") return Hypothesis::Null;
  if (text == "alt") return Hypothesis::Alternative;
  throw DomainError("hypothesis must be 'null' or 'alt'");
}

std::string_view to_string(Procedure p) {
  switch (p) {
    case Procedure::Welch: return "welch";
    case Procedure::Wmw: return "wmw";
    case Procedure::Combined: return "combined";
    case Procedure::Permutation: return "permutation";
  }
  return "unknown";
}

std::string_view display_name(Procedure p) {
  switch (p) {
    case Procedure::Welch: return "Welch t";
    case Procedure::Wmw: return "WMW";
    case Procedure::Combined: return "Combined";
    case Procedure::Permutation: return "Permutation";
  }
  return "unknown";
}

Procedure procedure_from_string(std::string_view text) {
  for (Procedure p : kProcedures) {
    if (to_string(p) == text) return p;
  }
  throw DomainError("unknown procedure '" + std::string(text) + "'");
}

void ScenarioConfig::validate() const {
  if (id.empty()) throw DomainError("scenario id must not be empty");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (n1 < 3 || n2 < 3) throw DomainError("n1 and n2 must be >= 3");
  if (n1 + n2 > 5000) throw DomainError("n1 + n2 must not exceed 5000");
  if (permutation_b < 1) throw DomainError("permutation_b must be >= 1");
  dist1.validate();
  dist2.validate();
  procedure.validate();
}

double ScenarioResult::decomposed_rate(Procedure p) const {
  const ProcedureRate& r = (*this)[p];
  const double used = static_cast<double>(replicates_used);
  const double reject_share = static_cast<double>(ms_rejections) / used;
  const double pass_share = 1.0 - reject_share;
  const double pass_term = std::isnan(r.rate_given_ms_pass) ? 0.0 : pass_share * r.rate_given_ms_pass;
  const double reject_term =
      std::isnan(r.rate_given_ms_reject) ? 0.0 : reject_share * r.rate_given_ms_reject;
  return pass_term + reject_term;
}

std::string scenario_scope(const ScenarioConfig& config) { return "scenario:" + config.id; }

std::uint8_t evaluate_replicate(const ScenarioConfig& config, RngStream& stream,
                                TwoSampleData& scratch) {
  scratch.x.clear();
  scratch.y.clear();
  sample_into(config.dist1, config.n1, stream, scratch.x);
  sample_into(config.dist2, config.n2, stream, scratch.y);
  try {
    std::uint8_t flags = 0;
    if (residual_normality_test(scratch, config.procedure.alpha_ms).reject) flags |= ReplicateFlags::kMs;
    if (welch_t_test(scratch, config.procedure.alpha).reject) flags |= ReplicateFlags::kWelch;
    if (wmw_test(scratch, config.procedure.alpha).reject) flags |= ReplicateFlags::kWmw;
    const bool permutation_rejects =
        config.permutation_method == PermutationMethod::Resampling
            ? permutation_mean_test(scratch, config.procedure.alpha, config.permutation_b, stream).reject
            : permutation_mean_clt_test(scratch, config.procedure.alpha).reject;
    if (permutation_rejects) flags |= ReplicateFlags::kPermutation;
    return flags;
  } catch (const DegenerateDataError&) {
    return ReplicateFlags::kDegenerate;
  }
}

ScenarioResult tally_replicates(const ScenarioConfig& config, std::span<const std::uint8_t> flags) {
  ScenarioResult out;
  out.scenario_id = config.id;
  out.label = config.label;
  out.hypothesis = config.hypothesis;
  out.master_seed = config.master_seed;
  out.replicates_requested = flags.size();
  for (std::uint8_t f : flags) {
    if (f & ReplicateFlags::kDegenerate) {
      ++out.degenerate;
      continue;
    }
    ++out.replicates_used;
    const bool ms = f & ReplicateFlags::kMs;
    if (ms) ++out.ms_rejections;
    for (Procedure p : kProcedures) {
      if (!procedure_rejects(f, p)) continue;
      ++out[p].rejections;
      if (ms) ++out[p].rejections_given_ms_reject;
    }
  }
  const std::uint64_t used = out.replicates_used;
  const std::uint64_t ms_pass = used - out.ms_rejections;
  out.ms_rejection_rate = conditional(out.ms_rejections, used);
  for (ProcedureRate& r : out.procedures) {
    r.rate = conditional(r.rejections, used);
    r.se = used == 0 ? std::numeric_limits<double>::quiet_NaN()
                     : std::sqrt(r.rate * (1.0 - r.rate) / static_cast<double>(used));
    r.rate_given_ms_reject = conditional(r.rejections_given_ms_reject, out.ms_rejections);
    r.rate_given_ms_pass = conditional(r.rejections - r.rejections_given_ms_reject, ms_pass);
  }
  return out;
}

ScenarioResult simulate_scenario(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  const std::string scope = scenario_scope(config);
  std::vector<std::uint8_t> flags(config.replicates, 0);
  parallel_for(config.replicates, options.workers, [&](std::size_t r) {
    thread_local TwoSampleData scratch;
    RngStream stream = RngStream::derive(config.master_seed, scope, r);
    flags[r] = evaluate_replicate(config, stream, scratch);
  });
  ScenarioResult result = tally_replicates(config, flags);
  const double degenerate_share =
      static_cast<double>(result.degenerate) / static_cast<double>(config.replicates);
  if (degenerate_share > options.max_degenerate_share) {
    throw DegenerateThresholdError("scenario '" + config.id + "': " +
                                   std::to_string(result.degenerate) + " of " +
                                   std::to_string(config.replicates) +
                                   " replicates produced degenerate data");
  }
  return result;
}

Probability binomial_level_test(std::uint64_t rejections, std::uint64_t n, Probability p0, Tail side) {
  if (rejections > n) throw DomainError("rejections must not exceed n");
  const double p = p0;
  const double k = static_cast<double>(rejections);
  const double trials = static_cast<double>(n);
  if (p == 0.0) return Probability(side == Tail::Greater ? (rejections == 0 ? 1.0 : 0.0) : 1.0);
  if (p == 1.0) return Probability(side == Tail::Less ? (rejections == n ? 1.0 : 0.0) : 1.0);

  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  auto log_pmf = [&](double j) {
    return std::lgamma(trials + 1.0) - std::lgamma(j + 1.0) - std::lgamma(trials - j + 1.0) +
           j * log_p + (trials - j) * log_q;
  };
  // Sum of pmf over [from, to] walking away from the mode, so terms shrink.
  auto upper_sum = [&](double from) {
    double term = std::exp(log_pmf(from));
    double sum = term;
    for (double j = from; j < trials; j += 1.0) {
      term *= (trials - j) / (j + 1.0) * p / (1.0 - p);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return sum;
  };
  auto lower_sum = [&](double to) {
    double term = std::exp(log_pmf(to));
    double sum = term;
    for (double j = to; j > 0.0; j -= 1.0) {
      term *= j / (trials - j + 1.0) * (1.0 - p) / p;
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return sum;
  };
  const double mode = std::floor((trials + 1.0) * p);
  double result;
  if (side == Tail::Greater) {
    if (rejections == 0) return Probability(1.0);
    result = k >= mode ? upper_sum(k) : 1.0 - lower_sum(k - 1.0);
  } else {
    if (rejections == n) return Probability(1.0);
    result = k <= mode ? lower_sum(k) : 1.0 - upper_sum(k + 1.0);
  }
  return Probability(std::clamp(result, 0.0, 1.0));
}

ProcedureRates rates_of(const ScenarioResult& result) {
  ProcedureRates out;
  for (std::size_t i = 0; i < kProcedures.size(); ++i) {
    out.rate[i] = result.procedures[i].rate;
    out.se[i] = result.procedures[i].se;
  }
  return out;
}

ProcedureRates convex_combination(std::span<const std::pair<ProcedureRates, double>> weighted) {
  if (weighted.empty()) throw DomainError("convex combination needs at least one result");
  double total = 0.0;
  for (const auto& [rates, w] : weighted) {
    if (!(w >= 0.0) || !(w <= 1.0)) throw DomainError("weights must lie in [0, 1]");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw DomainError("weights must sum to 1");
  ProcedureRates out;
  std::array<double, 4> variance{};
  for (const auto& [rates, w] : weighted) {
    for (std::size_t i = 0; i < 4; ++i) {
      out.rate[i] += w * rates.rate[i];
      variance[i] += w * w * rates.se[i] * rates.se[i];
    }
  }
  for (std::size_t i = 0; i < 4; ++i) out.se[i] = std::sqrt(variance[i]);
  return out;
}

}  // namespace mspretest
