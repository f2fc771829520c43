#include "mspretest/lambda_lab.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mspretest/errors.hpp"
#include "mspretest/parallel.hpp"

namespace mspretest {
namespace {

constexpr std::uint8_t kTheta = 1, kMs = 2, kMc = 4, kAu = 8, kDegenerate = 128;
constexpr std::uint64_t kMinBranch = 100;

double rate(std::uint64_t hits, std::uint64_t n) {
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

void check_rates(const LemmaInputs& in) {
  for (double v : {in.p_mc_theta, in.p_au_theta, in.p_mc_q, in.p_au_q, in.alpha_ms, in.alpha_ms_star}) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("lemma inputs must lie in [0, 1]");
  }
}

void require(const LemmaInputs& in, bool with_iii) {
  check_rates(in);
  if (!(in.delta_theta() > 0.0))
    throw AssumptionViolation(Assumption::I, "assumption (I) violated: p_mc_theta must exceed p_au_theta");
  if (!(in.delta_q() > 0.0))
    throw AssumptionViolation(Assumption::II, "assumption (II) violated: p_au_q must exceed p_mc_q");
  if (with_iii && in.alpha_ms_star < in.alpha_ms)
    throw AssumptionViolation(Assumption::III, "assumption (III) violated: alpha_ms_star is below alpha_ms");
}

// {lambda in [0, 1] : a + b lambda > 0} as [lo, hi], empty when lo >= hi.
std::pair<double, double> positive_part(double a, double b) {
  if (b == 0.0) return a > 0.0 ? std::pair{0.0, 1.0} : std::pair{1.0, 0.0};
  const double root = -a / b;
  if (b > 0.0) return {std::clamp(root, 0.0, 1.0), 1.0};
  return {0.0, std::clamp(root, 0.0, 1.0)};
}

void validate_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw DomainError("lambda_grid must have at least two points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw DomainError("lambda_grid values must lie in [0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("lambda_grid must be strictly increasing");
  }
  if (grid.front() != 0.0) throw DomainError("lambda_grid must include 0");
  if (grid.back() != 1.0) throw DomainError("lambda_grid must include 1");
}

}  // namespace

std::string_view to_string(Assumption a) {
  switch (a) {
    case Assumption::I: return "I";
    case Assumption::II: return "II";
    case Assumption::III: return "III";
  }
  return "?";
}

std::string_view to_string(MixtureProcedure p) {
  switch (p) {
    case MixtureProcedure::MC: return "mc";
    case MixtureProcedure::AU: return "au";
    case MixtureProcedure::Combined: return "combined";
  }
  return "?";
}

std::vector<double> MixtureSpec::default_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

void MixtureSpec::validate() const {
  if (id.empty()) throw DomainError("mixture id must not be empty");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (n1 < 3 || n2 < 3) throw DomainError("n1 and n2 must be >= 3");
  if (n1 + n2 > 5000) throw DomainError("n1 + n2 must not exceed 5000");
  validate_grid(lambda_grid);
  theta.dist1.validate();
  theta.dist2.validate();
  q.dist1.validate();
  q.dist2.validate();
  procedure.validate();
}

Probability lambda_star(const LemmaInputs& inputs) {
  require(inputs, false);
  const double dt = inputs.delta_theta();
  const double dq = inputs.delta_q();
  return Probability(dq / (dt + dq));
}

double analytic_mc_power(const LemmaInputs& in, double lambda) {
  return lambda * in.p_mc_theta + (1.0 - lambda) * in.p_mc_q;
}

double analytic_au_power(const LemmaInputs& in, double lambda) {
  return lambda * in.p_au_theta + (1.0 - lambda) * in.p_au_q;
}

double analytic_combined_power(const LemmaInputs& in, double lambda) {
  const double theta = in.alpha_ms * in.p_au_theta + (1.0 - in.alpha_ms) * in.p_mc_theta;
  const double q = in.alpha_ms_star * in.p_au_q + (1.0 - in.alpha_ms_star) * in.p_mc_q;
  return lambda * theta + (1.0 - lambda) * q;
}

double lemma_gain(const LemmaInputs& inputs) {
  require(inputs, true);
  const double dt = inputs.delta_theta();
  const double dq = inputs.delta_q();
  return dt * dq / (dt + dq) * (inputs.alpha_ms_star - inputs.alpha_ms);
}

std::vector<Assumption> LemmaReport::failed_assumptions() const {
  std::vector<Assumption> out;
  if (!assumption_i) out.push_back(Assumption::I);
  if (!assumption_ii) out.push_back(Assumption::II);
  if (!assumption_iii) out.push_back(Assumption::III);
  return out;
}

bool LemmaReport::gain_identity_holds(double tolerance) const {
  return identity_residual && *identity_residual <= tolerance;
}

LemmaReport verify_lemma(const LemmaInputs& inputs, const std::vector<double>& grid) {
  check_rates(inputs);
  LemmaReport report;
  report.inputs = inputs;
  report.assumption_i = inputs.delta_theta() > 0.0;
  report.assumption_ii = inputs.delta_q() > 0.0;
  report.assumption_iii = inputs.alpha_ms_star > inputs.alpha_ms;
  if (report.assumption_i && report.assumption_ii) {
    const double ls = lambda_star(inputs);
    report.lambda_star = ls;
    if (inputs.alpha_ms_star >= inputs.alpha_ms) {
      report.gain = lemma_gain(inputs);
      const double best = std::max(analytic_mc_power(inputs, ls), analytic_au_power(inputs, ls));
      report.identity_residual = std::fabs(analytic_combined_power(inputs, ls) - best - *report.gain);
    }
  }

  // combined - mc and combined - au are both linear in lambda.
  auto diff_mc = [&](double l) { return analytic_combined_power(inputs, l) - analytic_mc_power(inputs, l); };
  auto diff_au = [&](double l) { return analytic_combined_power(inputs, l) - analytic_au_power(inputs, l); };
  const auto [lo_mc, hi_mc] = positive_part(diff_mc(0.0), diff_mc(1.0) - diff_mc(0.0));
  const auto [lo_au, hi_au] = positive_part(diff_au(0.0), diff_au(1.0) - diff_au(0.0));
  const double lo = std::max(lo_mc, lo_au);
  const double hi = std::min(hi_mc, hi_au);
  if (lo < hi) report.superior_interval = std::pair{lo, hi};

  report.curve.reserve(grid.size());
  for (double l : grid) {
    report.curve.push_back({l, analytic_mc_power(inputs, l), analytic_au_power(inputs, l),
                            analytic_combined_power(inputs, l)});
  }
  return report;
}

void ComponentTally::add(const DecisionFlags& f) {
  ++n;
  if (f.ms) ++ms;
  if (f.mc) ++mc;
  if (f.au) ++au;
  if (f.combined()) ++combined;
  if (f.mc && f.ms) ++mc_and_ms;
  if (f.au && f.ms) ++au_and_ms;
}

DecisionSource kernel_decisions(const MixtureSpec& spec) {
  return [spec](Component component, RngStream& stream) {
    thread_local TwoSampleData data;
    const ComponentScenario& s = component == Component::Theta ? spec.theta : spec.q;
    data.x.clear();
    data.y.clear();
    sample_into(s.dist1, spec.n1, stream, data.x);
    sample_into(s.dist2, spec.n2, stream, data.y);
    DecisionFlags flags;
    try {
      flags.ms = residual_normality_test(data, spec.procedure.alpha_ms).reject;
      flags.mc = welch_t_test(data, spec.procedure.alpha).reject;
      flags.au = wmw_test(data, spec.procedure.alpha).reject;
    } catch (const DegenerateDataError&) {
      flags = DecisionFlags{};
      flags.degenerate = true;
    }
    return flags;
  };
}

DecisionSource bernoulli_decisions(BernoulliRates theta, BernoulliRates q) {
  for (const BernoulliRates& r : {theta, q}) {
    for (double v : {r.ms, r.mc, r.au}) {
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("Bernoulli rates must lie in [0, 1]");
    }
  }
  return [theta, q](Component component, RngStream& stream) {
    const BernoulliRates& r = component == Component::Theta ? theta : q;
    DecisionFlags flags;
    flags.ms = stream.uniform() < r.ms;
    flags.mc = stream.uniform() < r.mc;
    flags.au = stream.uniform() < r.au;
    return flags;
  };
}

LemmaInputs estimate_inputs(const ComponentTally& theta, const ComponentTally& q) {
  LemmaInputs in;
  in.p_mc_theta = rate(theta.mc, theta.n);
  in.p_au_theta = rate(theta.au, theta.n);
  in.alpha_ms = rate(theta.ms, theta.n);
  in.p_mc_q = rate(q.mc, q.n);
  in.p_au_q = rate(q.au, q.n);
  in.alpha_ms_star = rate(q.ms, q.n);
  return in;
}

MixtureSweep simulate_mixture_with(const DecisionSource& source, const std::string& id,
                                   const std::vector<double>& grid, std::size_t replicates,
                                   std::uint64_t master_seed, const RunOptions& options,
                                   std::optional<LemmaInputs> known_inputs) {
  if (id.empty()) throw DomainError("mixture id must not be empty");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  validate_grid(grid);
  if (known_inputs) check_rates(*known_inputs);

  const std::size_t total = grid.size() * replicates;
  std::vector<std::uint8_t> flags(total, 0);
  std::vector<std::string> scopes;
  scopes.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) scopes.push_back("mixture:" + id + ":lambda:" + std::to_string(i));

  parallel_for(total, options.workers, [&](std::size_t k) {
    const std::size_t i = k / replicates;
    const std::size_t r = k % replicates;
    RngStream stream = RngStream::derive(master_seed, scopes[i], r);
    const Component component = stream.uniform() < grid[i] ? Component::Theta : Component::Q;
    const DecisionFlags d = source(component, stream);
    std::uint8_t f = component == Component::Theta ? kTheta : 0;
    if (d.degenerate) {
      f |= kDegenerate;
    } else {
      if (d.ms) f |= kMs;
      if (d.mc) f |= kMc;
      if (d.au) f |= kAu;
    }
    flags[k] = f;
  });

  MixtureSweep sweep;
  sweep.id = id;
  sweep.master_seed = master_seed;
  std::size_t degenerate = 0;
  std::vector<std::array<std::uint64_t, 3>> hits(grid.size(), {0, 0, 0});
  std::vector<std::size_t> used(grid.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    const std::uint8_t f = flags[k];
    if (f & kDegenerate) {
      ++degenerate;
      continue;
    }
    const DecisionFlags d{(f & kMs) != 0, (f & kMc) != 0, (f & kAu) != 0, false};
    (f & kTheta ? sweep.theta : sweep.q).add(d);
    const std::size_t i = k / replicates;
    ++used[i];
    hits[i][0] += d.mc;
    hits[i][1] += d.au;
    hits[i][2] += d.combined();
  }
  if (static_cast<double>(degenerate) / static_cast<double>(total) > options.max_degenerate_share) {
    throw DegenerateThresholdError("mixture '" + id + "': " + std::to_string(degenerate) + " of " +
                                   std::to_string(total) + " replicates produced degenerate data");
  }

  sweep.inputs = known_inputs ? *known_inputs : estimate_inputs(sweep.theta, sweep.q);
  if (sweep.inputs.delta_theta() > 0.0 && sweep.inputs.delta_q() > 0.0) {
    sweep.lambda_star = lambda_star(sweep.inputs);
    if (sweep.inputs.alpha_ms_star >= sweep.inputs.alpha_ms) sweep.gain = lemma_gain(sweep.inputs);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    MixturePoint p;
    p.lambda = grid[i];
    p.replicates = used[i];
    const double l = grid[i];
    p.analytic = {analytic_mc_power(sweep.inputs, l), analytic_au_power(sweep.inputs, l),
                  analytic_combined_power(sweep.inputs, l)};
    for (std::size_t j = 0; j < 3; ++j) {
      p.power[j] = used[i] == 0 ? std::nan("") : rate(hits[i][j], used[i]);
      p.se[j] = used[i] == 0 ? std::nan("")
                             : std::sqrt(p.power[j] * (1.0 - p.power[j]) / static_cast<double>(used[i]));
    }
    sweep.points.push_back(p);
  }
  return sweep;
}

MixtureSweep simulate_mixture(const MixtureSpec& spec, const RunOptions& options) {
  spec.validate();
  return simulate_mixture_with(kernel_decisions(spec), spec.id, spec.lambda_grid, spec.replicates,
                               spec.master_seed, options);
}

ComponentTally tally_from(const ScenarioResult& result) {
  ComponentTally t;
  t.n = result.replicates_used;
  t.ms = result.ms_rejections;
  t.mc = result[Procedure::Welch].rejections;
  t.au = result[Procedure::Wmw].rejections;
  t.combined = result[Procedure::Combined].rejections;
  t.mc_and_ms = result[Procedure::Welch].rejections_given_ms_reject;
  t.au_and_ms = result[Procedure::Wmw].rejections_given_ms_reject;
  return t;
}

ConditionalGap conditional_gap(std::uint64_t main_and_ms, std::uint64_t main_total,
                               std::uint64_t ms_total, std::uint64_t n) {
  if (main_and_ms > main_total || main_and_ms > ms_total || ms_total > n || main_total > n)
    throw DomainError("inconsistent counts for conditional gap");
  ConditionalGap g;
  g.ms_reject_count = ms_total;
  g.ms_pass_count = n - ms_total;
  if (g.ms_reject_count < kMinBranch || g.ms_pass_count < kMinBranch) return g;
  const double a = rate(main_and_ms, g.ms_reject_count);
  const double b = rate(main_total - main_and_ms, g.ms_pass_count);
  g.gap = std::fabs(a - b);
  g.se = std::sqrt(a * (1.0 - a) / static_cast<double>(g.ms_reject_count) +
                   b * (1.0 - b) / static_cast<double>(g.ms_pass_count));
  return g;
}

IndependenceDiagnostics independence_diagnostics(const ComponentTally& theta, const ComponentTally& q) {
  IndependenceDiagnostics d;
  d.mc_theta = conditional_gap(theta.mc_and_ms, theta.mc, theta.ms, theta.n);
  d.au_theta = conditional_gap(theta.au_and_ms, theta.au, theta.ms, theta.n);
  d.mc_q = conditional_gap(q.mc_and_ms, q.mc, q.ms, q.n);
  d.au_q = conditional_gap(q.au_and_ms, q.au, q.ms, q.n);
  for (const ConditionalGap* g : {&d.mc_theta, &d.au_theta, &d.mc_q, &d.au_q}) {
    if (g->gap) d.delta_max = std::max(d.delta_max.value_or(0.0), *g->gap);
  }
  return d;
}

IndependenceDiagnostics independence_diagnostics(const MixtureSweep& sweep) {
  return independence_diagnostics(sweep.theta, sweep.q);
}

IndependenceDiagnostics independence_diagnostics(const ScenarioConfig& theta, const ScenarioConfig& q,
                                                 const RunOptions& options) {
  return independence_diagnostics(tally_from(simulate_scenario(theta, options)),
                                  tally_from(simulate_scenario(q, options)));
}

IndependenceDiagnostics independence_diagnostics(const DecisionSource& source, std::size_t replicates,
                                                 std::uint64_t master_seed, const RunOptions& options) {
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  std::vector<DecisionFlags> theta(replicates), q(replicates);
  parallel_for(replicates, options.workers, [&](std::size_t r) {
    RngStream a = RngStream::derive(master_seed, "diagnostics:theta", r);
    RngStream b = RngStream::derive(master_seed, "diagnostics:q", r);
    theta[r] = source(Component::Theta, a);
    q[r] = source(Component::Q, b);
  });
  ComponentTally tt, tq;
  for (const auto& f : theta)
    if (!f.degenerate) tt.add(f);
  for (const auto& f : q)
    if (!f.degenerate) tq.add(f);
  return independence_diagnostics(tt, tq);
}

}  // namespace mspretest
