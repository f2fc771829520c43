#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mspretest/config.hpp"
#include "mspretest/lambda_lab.hpp"
#include "mspretest/mc_engine.hpp"

namespace mspretest {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum class TableFormat { Csv, Json, Text };

std::string_view to_string(TableFormat f);
TableFormat table_format_from_string(std::string_view text);  // DomainError if unknown

// One row per (scenario, procedure), scenarios in the given order and
// procedures as Welch, WMW, Combined, Permutation. Numbers use the shortest
// round-trip representation; empty conditional rates are NA in CSV and null
// in JSON.
std::string results_csv(std::span<const ScenarioResult> results);
std::string results_json(std::span<const ScenarioResult> results);

/// Error-rate table: one block per distribution label, one row
/// per procedure, with the null scenario's rate as type 1 error and one minus
/// the alternative's rate as type 2 error, both to four decimals.
std::string results_text(std::span<const ScenarioResult> results);

std::string emit_table(std::span<const ScenarioResult> results, TableFormat format);

// ".0498"; values of 1 or more keep their integer digit.
std::string format_rate(double rate);

/// A row of results_csv, read back.
struct ResultRow {
  std::string scenario_id;
  Procedure procedure = Procedure::Welch;
  Hypothesis hypothesis = Hypothesis::Null;
  double rate = 0.0;
  double se = 0.0;
  double ms_rate = 0.0;
  double rate_given_pass = 0.0;
  double rate_given_reject = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
};

// Throws ConfigError with the line number on malformed input.
std::vector<ResultRow> parse_results_csv(std::string_view text);

struct Combination {
  Hypothesis hypothesis = Hypothesis::Null;
  std::vector<std::pair<std::string, double>> weights;
  ProcedureRates rates;
};

// Weights are keyed by scenario id; every weighted scenario must be present
// with all four procedures and share one hypothesis (ConfigError otherwise).
Combination combine_rows(std::span<const ResultRow> rows,
                         std::span<const std::pair<std::string, double>> weights);

// procedure, rate, se and, for alternatives, type 2 error.
std::string combination_text(const Combination& c);
std::string combination_csv(const Combination& c);

// Columns: lambda, procedure, power, se, analytic_power.
std::string mixture_csv(const MixtureSweep& sweep);

struct PowerCurveOptions {
  std::vector<MixtureProcedure> procedures{kMixtureProcedures.begin(), kMixtureProcedures.end()};
  bool analytic_overlay = true;
  int width = 640;
  int height = 420;
};

// Self-contained SVG: one polyline per procedure and, optionally, a dashed
// polyline per analytic curve. Axes and ticks are drawn with line elements.
std::string power_curve_svg(const MixtureSweep& sweep, const PowerCurveOptions& options = {});

std::string lemma_report_text(const LemmaReport& report);
std::string lemma_report_json(const LemmaReport& report);

std::string sweep_summary_text(const MixtureSweep& sweep, const IndependenceDiagnostics& diagnostics);

/// Provenance of one CLI run.
struct RunManifest {
  std::string command;
  std::string config_digest;  // hex FNV-1a of the canonical config text
  std::string tool_version{kToolVersion};
  std::uint64_t master_seed = 0;
  std::string started_at;   // ISO 8601, UTC
  std::string finished_at;
  unsigned workers = 1;
  std::vector<std::string> outputs;
};

std::string config_digest(const ConfigDocument& doc);
bool manifest_matches(const RunManifest& manifest, const ConfigDocument& doc);
std::string manifest_json(const RunManifest& manifest);
RunManifest parse_manifest_json(std::string_view text);

std::string utc_timestamp();

}  // namespace mspretest
