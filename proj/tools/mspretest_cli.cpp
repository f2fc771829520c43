#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mspretest/config.hpp"
#include "mspretest/errors.hpp"
#include "mspretest/parallel.hpp"
#include "mspretest/reports.hpp"

namespace fs = std::filesystem;
using namespace mspretest;

namespace {

constexpr int kOk = 0;
constexpr int kIoError = 1;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;
constexpr int kDegenerate = 4;
constexpr std::size_t kFullScale = 100000;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<std::size_t> replicates;
  std::optional<std::uint64_t> seed;
  bool full_scale = false;

  std::optional<std::size_t> replicate_count() const {
    if (replicates) return replicates;
    if (full_scale) return kFullScale;
    return std::nullopt;
  }
};

void write_file(const fs::path& path, const std::string& content, std::vector<std::string>& outputs) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  outputs.push_back(path.string());
}

void write_manifest(const fs::path& dir, RunManifest manifest) {
  manifest.finished_at = utc_timestamp();
  const fs::path path = dir / "manifest.json";
  manifest.outputs.push_back(path.string());
  std::vector<std::string> ignored;
  write_file(path, manifest_json(manifest), ignored);
}

ConfigDocument load_with(const std::string& path, const Overrides& o) {
  ConfigDocument doc = load_config(path);
  for (ScenarioConfig& s : doc.scenarios) {
    if (auto r = o.replicate_count()) s.replicates = *r;
    if (o.seed) s.master_seed = *o.seed;
  }
  for (MixtureSpec& m : doc.mixtures) {
    if (auto r = o.replicate_count()) m.replicates = *r;
    if (o.seed) m.master_seed = *o.seed;
  }
  if (o.replicates && *o.replicates == 0) throw ConfigError("--replicates must be >= 1");
  return doc;
}

int run_simulate(const std::string& config, const fs::path& out_dir, const Overrides& o, TableFormat format,
                 unsigned workers) {
  RunManifest manifest;
  manifest.command = "simulate";
  manifest.started_at = utc_timestamp();
  manifest.workers = workers;
  const ConfigDocument doc = load_with(config, o);
  if (doc.scenarios.empty()) throw ConfigError("no scenarios defined in '" + config + "'");
  manifest.config_digest = config_digest(doc);
  manifest.master_seed = doc.scenarios.front().master_seed;

  std::vector<ScenarioResult> results;
  for (const ScenarioConfig& s : doc.scenarios) {
    std::cerr << "scenario " << s.id << " (" << s.replicates << " replicates)\n";
    results.push_back(simulate_scenario(s, {.workers = workers}));
  }

  write_file(out_dir / "results.csv", results_csv(results), manifest.outputs);
  write_file(out_dir / "results.json", results_json(results), manifest.outputs);
  write_file(out_dir / "table.txt", results_text(results), manifest.outputs);
  write_manifest(out_dir, manifest);

  std::cout << emit_table(results, format);
  if (format == TableFormat::Text) {
    std::cout << "\nMS rejection rate and one-sided binomial p of Combined above 0.05 (null scenarios)\n";
    for (const ScenarioResult& r : results) {
      if (r.hypothesis != Hypothesis::Null) continue;
      const double p = binomial_level_test(r[Procedure::Combined].rejections, r.replicates_used,
                                           Probability(0.05), Tail::Greater);
      std::printf("%s | ms %s | combined %s | p %.4g\n", r.scenario_id.c_str(),
                  format_rate(r.ms_rejection_rate).c_str(), format_rate(r[Procedure::Combined].rate).c_str(), p);
    }
  }
  return kOk;
}

int run_mixture(const std::string& config, const fs::path& out_dir, const Overrides& o, unsigned workers) {
  RunManifest manifest;
  manifest.command = "mixture";
  manifest.started_at = utc_timestamp();
  manifest.workers = workers;
  const ConfigDocument doc = load_with(config, o);
  if (doc.mixtures.empty()) throw ConfigError("no mixtures defined in '" + config + "'");
  manifest.config_digest = config_digest(doc);
  manifest.master_seed = doc.mixtures.front().master_seed;

  for (const MixtureSpec& m : doc.mixtures) {
    std::cerr << "mixture " << m.id << " (" << m.replicates << " replicates per lambda)\n";
    const MixtureSweep sweep = simulate_mixture(m, {.workers = workers});
    write_file(out_dir / (m.id + ".csv"), mixture_csv(sweep), manifest.outputs);
    write_file(out_dir / (m.id + ".svg"), power_curve_svg(sweep), manifest.outputs);
    std::cout << sweep_summary_text(sweep, independence_diagnostics(sweep)) << '\n';
    std::cout << mixture_csv(sweep);
  }
  write_manifest(out_dir, manifest);
  return kOk;
}

int run_lemma(const std::string& inputs, TableFormat format) {
  const LemmaReport report = verify_lemma(parse_lemma_inputs(read_text_file(inputs)));
  std::cout << (format == TableFormat::Json ? lemma_report_json(report) : lemma_report_text(report));
  return kOk;
}

int run_combine(const std::string& results, const std::string& weights, TableFormat format) {
  const auto rows = parse_results_csv(read_text_file(results));
  const Combination c = combine_rows(rows, parse_weights(read_text_file(weights)));
  std::cout << (format == TableFormat::Csv ? combination_csv(c) : combination_text(c));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation of combined procedures with a misspecification pretest"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  unsigned workers = default_worker_count();
  app.add_option("-w,--workers", workers, "Worker threads (default: MSPRETEST_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);

  std::string config, inputs, results, weights, out_dir = "out", format_name;
  Overrides overrides;

  auto* simulate = app.add_subcommand("simulate", "Run the scenarios of a config file");
  simulate->add_option("config", config, "Scenario config")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", out_dir, "Output directory");
  simulate->add_option("-f,--format", format_name, "Table on stdout: text, csv or json")->default_val("text");

  auto* mixture = app.add_subcommand("mixture", "Run the mixture sweeps of a config file");
  mixture->add_option("config", config, "Mixture config")->required()->check(CLI::ExistingFile);
  mixture->add_option("-o,--out", out_dir, "Output directory");

  for (CLI::App* sub : {simulate, mixture}) {
    sub->add_option("-r,--replicates", overrides.replicates, "Override replicates");
    sub->add_option("-s,--seed", overrides.seed, "Override the master seed");
    sub->add_flag("--full-scale", overrides.full_scale, "Use 100000 replicates");
  }

  auto* lemma = app.add_subcommand("lemma", "Analytic report for a set of lemma inputs");
  lemma->add_option("inputs", inputs, "Lemma inputs file")->required()->check(CLI::ExistingFile);
  lemma->add_option("-f,--format", format_name, "text or json")->default_val("text");

  auto* combine = app.add_subcommand("combine", "Weighted average of scenario results");
  combine->add_option("results", results, "results.csv from simulate")->required()->check(CLI::ExistingFile);
  combine->add_option("weights", weights, "scenario_id = weight lines")->required()->check(CLI::ExistingFile);
  combine->add_option("-f,--format", format_name, "text or csv")->default_val("text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const TableFormat format = format_name.empty() ? TableFormat::Text : table_format_from_string(format_name);
    if (*simulate) return run_simulate(config, out_dir, overrides, format, workers);
    if (*mixture) return run_mixture(config, out_dir, overrides, workers);
    if (*lemma) return run_lemma(inputs, format);
    if (*combine) return run_combine(results, weights, format);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const DegenerateThresholdError& e) {
    std::cerr << "degenerate data: " << e.what() << '\n';
    return kDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}
