#include "mspretest/reports.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mspretest/errors.hpp"

namespace mspretest {
namespace {

using nlohmann::json;

std::string number(double v) {
  if (std::isnan(v)) return "NA";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

json json_number(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = line.find(sep);
    out.push_back(line.substr(0, pos));
    if (pos == std::string_view::npos) break;
    line = line.substr(pos + 1);
  }
  return out;
}

constexpr std::string_view kResultsHeader =
    "scenario_id,procedure,hypothesis,rate,se,ms_rate,rate_given_pass,rate_given_reject,replicates,seed";

std::string_view color_of(MixtureProcedure p) {
  switch (p) {
    case MixtureProcedure::MC: return "#1f77b4";
    case MixtureProcedure::AU: return "#d62728";
    case MixtureProcedure::Combined: return "#2ca02c";
  }
  return "#000000";
}

std::string_view display_name(MixtureProcedure p) {
  switch (p) {
    case MixtureProcedure::MC: return "MC (Welch t)";
    case MixtureProcedure::AU: return "AU (WMW)";
    case MixtureProcedure::Combined: return "Combined";
  }
  return "?";
}

}  // namespace

std::string_view to_string(TableFormat f) {
  switch (f) {
    case TableFormat::Csv: return "csv";
    case TableFormat::Json: return "json";
    case TableFormat::Text: return "text";
  }
  return "?";
}

TableFormat table_format_from_string(std::string_view text) {
  for (TableFormat f : {TableFormat::Csv, TableFormat::Json, TableFormat::Text}) {
    if (to_string(f) == text) return f;
  }
  throw DomainError("format must be csv, json or text");
}

std::string format_rate(double rate) {
  if (std::isnan(rate)) return "NA";
  std::string s = fixed(rate, 4);
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  return s;
}

std::string results_csv(std::span<const ScenarioResult> results) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const ScenarioResult& r : results) {
    for (Procedure p : kProcedures) {
      const ProcedureRate& pr = r[p];
      out << r.scenario_id << ',' << to_string(p) << ',' << to_string(r.hypothesis) << ','
          << number(pr.rate) << ',' << number(pr.se) << ',' << number(r.ms_rejection_rate) << ','
          << number(pr.rate_given_ms_pass) << ',' << number(pr.rate_given_ms_reject) << ','
          << r.replicates_used << ',' << r.master_seed << '\n';
    }
  }
  return out.str();
}

std::string results_json(std::span<const ScenarioResult> results) {
  json scenarios = json::array();
  for (const ScenarioResult& r : results) {
    json procedures = json::array();
    for (Procedure p : kProcedures) {
      const ProcedureRate& pr = r[p];
      procedures.push_back({{"procedure", to_string(p)},
                            {"rate", json_number(pr.rate)},
                            {"se", json_number(pr.se)},
                            {"rate_given_pass", json_number(pr.rate_given_ms_pass)},
                            {"rate_given_reject", json_number(pr.rate_given_ms_reject)}});
    }
    scenarios.push_back({{"scenario_id", r.scenario_id},
                         {"label", r.label},
                         {"hypothesis", to_string(r.hypothesis)},
                         {"seed", r.master_seed},
                         {"replicates", r.replicates_used},
                         {"replicates_requested", r.replicates_requested},
                         {"degenerate", r.degenerate},
                         {"ms_rate", json_number(r.ms_rejection_rate)},
                         {"procedures", procedures}});
  }
  return json{{"scenarios", scenarios}}.dump(2) + "\n";
}

std::string results_text(std::span<const ScenarioResult> results) {
  std::vector<std::string> labels;
  std::map<std::string, const ScenarioResult*> nulls, alts;
  for (const ScenarioResult& r : results) {
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
    auto& slot = r.hypothesis == Hypothesis::Null ? nulls : alts;
    slot.emplace(r.label, &r);
  }
  std::ostringstream out;
  out << "Procedure | Distribution | Type 1 error | Type 2 error\n";
  for (const std::string& label : labels) {
    out << "---\n";
    const auto n = nulls.find(label);
    const auto a = alts.find(label);
    for (Procedure p : kProcedures) {
      const std::string type1 = n == nulls.end() ? "-" : format_rate((*n->second)[p].rate);
      const std::string type2 = a == alts.end() ? "-" : format_rate(1.0 - (*a->second)[p].rate);
      out << display_name(p) << " | " << label << " | " << type1 << " | " << type2 << '\n';
    }
  }
  return out.str();
}

std::string emit_table(std::span<const ScenarioResult> results, TableFormat format) {
  switch (format) {
    case TableFormat::Csv: return results_csv(results);
    case TableFormat::Json: return results_json(results);
    case TableFormat::Text: return results_text(results);
  }
  return {};
}

std::vector<ResultRow> parse_results_csv(std::string_view text) {
  std::vector<ResultRow> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kResultsHeader) throw ConfigError("unexpected results header", line_no);
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 10) throw ConfigError("expected 10 columns", line_no);
    auto real = [&](std::string_view s) {
      if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("'" + std::string(s) + "' is not a number", line_no);
      return v;
    };
    auto integer = [&](std::string_view s) {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("'" + std::string(s) + "' is not an integer", line_no);
      return v;
    };
    ResultRow row;
    row.scenario_id = std::string(f[0]);
    try {
      row.procedure = procedure_from_string(f[1]);
      row.hypothesis = hypothesis_from_string(f[2]);
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), line_no);
    }
    row.rate = real(f[3]);
    row.se = real(f[4]);
    row.ms_rate = real(f[5]);
    row.rate_given_pass = real(f[6]);
    row.rate_given_reject = real(f[7]);
    row.replicates = integer(f[8]);
    row.seed = integer(f[9]);
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ConfigError("results file is empty");
  return rows;
}

Combination combine_rows(std::span<const ResultRow> rows,
                         std::span<const std::pair<std::string, double>> weights) {
  Combination c;
  c.weights.assign(weights.begin(), weights.end());
  std::vector<std::pair<ProcedureRates, double>> weighted;
  std::optional<Hypothesis> hypothesis;
  for (const auto& [id, w] : weights) {
    ProcedureRates rates;
    std::array<bool, 4> seen{};
    for (const ResultRow& row : rows) {
      if (row.scenario_id != id) continue;
      if (!hypothesis) hypothesis = row.hypothesis;
      if (row.hypothesis != *hypothesis)
        throw ConfigError("weighted scenarios mix null and alternative results", 0, id);
      const auto k = static_cast<std::size_t>(row.procedure);
      rates.rate[k] = row.rate;
      rates.se[k] = row.se;
      seen[k] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
      throw ConfigError("scenario '" + id + "' is missing from the results or incomplete", 0, id);
    weighted.emplace_back(rates, w);
  }
  if (hypothesis) c.hypothesis = *hypothesis;
  try {
    c.rates = convex_combination(weighted);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string combination_text(const Combination& c) {
  std::ostringstream out;
  out << "Weights (" << to_string(c.hypothesis) << "):";
  for (const auto& [id, w] : c.weights) out << ' ' << id << '=' << number(w);
  out << "\n\n";
  const bool alt = c.hypothesis == Hypothesis::Alternative;
  out << "Procedure   | Rate   | SE     " << (alt ? "| Type 2 error" : "") << '\n';
  for (Procedure p : kProcedures) {
    const auto k = static_cast<std::size_t>(p);
    std::string name(display_name(p));
    name.resize(11, ' ');
    out << name << " | " << format_rate(c.rates.rate[k]) << "  | " << format_rate(c.rates.se[k]) << "  ";
    if (alt) out << "| " << format_rate(1.0 - c.rates.rate[k]);
    out << '\n';
  }
  return out.str();
}

std::string combination_csv(const Combination& c) {
  std::ostringstream out;
  out << "procedure,hypothesis,rate,se,type2\n";
  for (Procedure p : kProcedures) {
    const auto k = static_cast<std::size_t>(p);
    out << to_string(p) << ',' << to_string(c.hypothesis) << ',' << number(c.rates.rate[k]) << ','
        << number(c.rates.se[k]) << ','
        << (c.hypothesis == Hypothesis::Alternative ? number(1.0 - c.rates.rate[k]) : "NA") << '\n';
  }
  return out.str();
}

std::string mixture_csv(const MixtureSweep& sweep) {
  std::ostringstream out;
  out << "lambda,procedure,power,se,analytic_power\n";
  for (const MixturePoint& p : sweep.points) {
    for (std::size_t j = 0; j < kMixtureProcedures.size(); ++j) {
      out << number(p.lambda) << ',' << to_string(kMixtureProcedures[j]) << ',' << number(p.power[j])
          << ',' << number(p.se[j]) << ',' << number(p.analytic[j]) << '\n';
    }
  }
  return out.str();
}

std::string power_curve_svg(const MixtureSweep& sweep, const PowerCurveOptions& options) {
  const double left = 70, right = 190, top = 30, bottom = 60;
  const double w = options.width, h = options.height;
  const double plot_w = w - left - right, plot_h = h - top - bottom;

  double lo = 1.0, hi = 0.0;
  for (const MixturePoint& p : sweep.points) {
    for (MixtureProcedure proc : options.procedures) {
      const auto j = static_cast<std::size_t>(proc);
      for (double v : {p.power[j], options.analytic_overlay ? p.analytic[j] : p.power[j]}) {
        if (std::isnan(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (lo > hi) lo = 0.0, hi = 1.0;
  lo = std::max(0.0, std::floor(lo * 10.0 - 1e-9) / 10.0);
  hi = std::min(1.0, std::ceil(hi * 10.0 + 1e-9) / 10.0);
  if (hi - lo < 0.1) hi = std::min(1.0, lo + 0.1), lo = hi - 0.1;
  const double step = hi - lo > 0.5 ? 0.2 : 0.1;

  auto x_of = [&](double l) { return left + l * plot_w; };
  auto y_of = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };
  auto coord = [](double v) { return fixed(v, 2); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
      << options.height << "\" viewBox=\"0 0 " << options.width << ' ' << options.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << options.width << "\" height=\"" << options.height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << coord(left + plot_w / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
      << "Power along the mixture " << sweep.id << "</text>\n";

  out << "<g class=\"axes\" stroke=\"#333333\">\n";
  out << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(top + plot_h) << "\" x2=\"" << coord(left + plot_w)
      << "\" y2=\"" << coord(top + plot_h) << "\"/>\n";
  out << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(top) << "\" x2=\"" << coord(left)
      << "\" y2=\"" << coord(top + plot_h) << "\"/>\n";
  for (int i = 0; i <= 10; i += 2) {
    const double l = i / 10.0;
    out << "<line x1=\"" << coord(x_of(l)) << "\" y1=\"" << coord(top + plot_h) << "\" x2=\""
        << coord(x_of(l)) << "\" y2=\"" << coord(top + plot_h + 5) << "\"/>\n";
  }
  const int ticks = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= ticks; ++i) {
    const double v = lo + i * step;
    out << "<line x1=\"" << coord(left - 5) << "\" y1=\"" << coord(y_of(v)) << "\" x2=\"" << coord(left)
        << "\" y2=\"" << coord(y_of(v)) << "\"/>\n";
  }
  out << "</g>\n<g class=\"tick-labels\" fill=\"#333333\">\n";
  for (int i = 0; i <= 10; i += 2) {
    const double l = i / 10.0;
    out << "<text x=\"" << coord(x_of(l)) << "\" y=\"" << coord(top + plot_h + 19)
        << "\" text-anchor=\"middle\">" << fixed(l, 1) << "</text>\n";
  }
  for (int i = 0; i <= ticks; ++i) {
    const double v = lo + i * step;
    out << "<text x=\"" << coord(left - 8) << "\" y=\"" << coord(y_of(v) + 4) << "\" text-anchor=\"end\">"
        << fixed(v, 1) << "</text>\n";
  }
  out << "</g>\n";
  out << "<text x=\"" << coord(left + plot_w / 2) << "\" y=\"" << coord(h - 15)
      << "\" text-anchor=\"middle\">lambda (share of datasets from the normal-theory model)</text>\n";
  out << "<text x=\"18\" y=\"" << coord(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << coord(top + plot_h / 2) << ")\">Power</text>\n";

  auto polyline = [&](MixtureProcedure proc, bool analytic) {
    const auto j = static_cast<std::size_t>(proc);
    out << "<polyline class=\"" << (analytic ? "analytic" : "simulated") << "\" data-procedure=\""
        << to_string(proc) << "\" fill=\"none\" stroke=\"" << color_of(proc) << "\" stroke-width=\""
        << (analytic ? "1.5" : "2") << '"' << (analytic ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    bool first = true;
    for (const MixturePoint& p : sweep.points) {
      const double v = analytic ? p.analytic[j] : p.power[j];
      if (std::isnan(v)) continue;
      out << (first ? "" : " ") << coord(x_of(p.lambda)) << ',' << coord(y_of(v));
      first = false;
    }
    out << "\"/>\n";
  };
  for (MixtureProcedure proc : options.procedures) polyline(proc, false);
  if (options.analytic_overlay) {
    for (MixtureProcedure proc : options.procedures) polyline(proc, true);
  }

  out << "<g class=\"legend\">\n";
  double ly = top + 10;
  const double lx = left + plot_w + 20;
  for (MixtureProcedure proc : options.procedures) {
    out << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(ly) << "\" x2=\"" << coord(lx + 24) << "\" y2=\""
        << coord(ly) << "\" stroke=\"" << color_of(proc) << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << coord(lx + 30) << "\" y=\"" << coord(ly + 4) << "\">" << display_name(proc)
        << "</text>\n";
    ly += 20;
  }
  if (options.analytic_overlay) {
    out << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(ly) << "\" x2=\"" << coord(lx + 24) << "\" y2=\""
        << coord(ly) << "\" stroke=\"#555555\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
    out << "<text x=\"" << coord(lx + 30) << "\" y=\"" << coord(ly + 4) << "\">analytic</text>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

std::string lemma_report_text(const LemmaReport& r) {
  std::ostringstream out;
  auto row = [&](std::string_view name, const std::string& value) {
    std::string n(name);
    n.resize(22, ' ');
    out << n << value << '\n';
  };
  const LemmaInputs& in = r.inputs;
  row("p_mc_theta", fixed(in.p_mc_theta, 6));
  row("p_au_theta", fixed(in.p_au_theta, 6));
  row("p_mc_q", fixed(in.p_mc_q, 6));
  row("p_au_q", fixed(in.p_au_q, 6));
  row("alpha_ms", fixed(in.alpha_ms, 6));
  row("alpha_ms_star", fixed(in.alpha_ms_star, 6));
  row("delta_theta", fixed(in.delta_theta(), 6));
  row("delta_q", fixed(in.delta_q(), 6));
  row("assumption I", r.assumption_i ? "holds" : "FAILS");
  row("assumption II", r.assumption_ii ? "holds" : "FAILS");
  row("assumption III", r.assumption_iii ? "holds" : "FAILS");
  row("lambda_star", r.lambda_star ? fixed(*r.lambda_star, 6) : "undefined");
  row("gain", r.gain ? fixed(*r.gain, 6) : "undefined");
  row("superior interval",
      r.superior_interval ? "(" + fixed(r.superior_interval->first, 6) + ", " + fixed(r.superior_interval->second, 6) + ")"
                          : "empty");
  if (r.identity_residual) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", *r.identity_residual);
    row("gain identity", std::string(buf) + (r.gain_identity_holds() ? " (ok)" : " (VIOLATED)"));
  }
  out << "\nlambda    mc        au        combined\n";
  for (const LemmaCurvePoint& p : r.curve) {
    out << fixed(p.lambda, 2) << "      " << fixed(p.mc, 6) << "  " << fixed(p.au, 6) << "  " << fixed(p.combined, 6)
        << '\n';
  }
  return out.str();
}

std::string lemma_report_json(const LemmaReport& r) {
  const LemmaInputs& in = r.inputs;
  json curve = json::array();
  for (const LemmaCurvePoint& p : r.curve)
    curve.push_back({{"lambda", p.lambda}, {"mc", p.mc}, {"au", p.au}, {"combined", p.combined}});
  json failed = json::array();
  for (Assumption a : r.failed_assumptions()) failed.push_back(to_string(a));
  json doc{{"inputs",
            {{"p_mc_theta", in.p_mc_theta},
             {"p_au_theta", in.p_au_theta},
             {"p_mc_q", in.p_mc_q},
             {"p_au_q", in.p_au_q},
             {"alpha_ms", in.alpha_ms},
             {"alpha_ms_star", in.alpha_ms_star}}},
           {"delta_theta", in.delta_theta()},
           {"delta_q", in.delta_q()},
           {"failed_assumptions", failed},
           {"lambda_star", r.lambda_star ? json(*r.lambda_star) : json(nullptr)},
           {"gain", r.gain ? json(*r.gain) : json(nullptr)},
           {"superior_interval", r.superior_interval ? json::array({r.superior_interval->first, r.superior_interval->second})
                                                     : json(nullptr)},
           {"identity_residual", r.identity_residual ? json(*r.identity_residual) : json(nullptr)},
           {"curve", curve}};
  return doc.dump(2) + "\n";
}

std::string sweep_summary_text(const MixtureSweep& sweep, const IndependenceDiagnostics& d) {
  std::ostringstream out;
  const LemmaInputs& in = sweep.inputs;
  out << "mixture " << sweep.id << " (seed " << sweep.master_seed << ")\n";
  out << "estimated p_mc_theta " << fixed(in.p_mc_theta, 4) << "  p_au_theta " << fixed(in.p_au_theta, 4)
      << "  alpha_ms " << fixed(in.alpha_ms, 4) << '\n';
  out << "estimated p_mc_q     " << fixed(in.p_mc_q, 4) << "  p_au_q     " << fixed(in.p_au_q, 4)
      << "  alpha_ms_star " << fixed(in.alpha_ms_star, 4) << '\n';
  out << "lambda_star " << (sweep.lambda_star ? fixed(*sweep.lambda_star, 4) : "undefined") << "  gain "
      << (sweep.gain ? fixed(*sweep.gain, 4) : "undefined") << '\n';
  auto gap = [&](std::string_view name, const ConditionalGap& g) {
    out << "  " << name << ' '
        << (g.gap ? fixed(*g.gap, 4) + " (se " + fixed(g.se, 4) + ")" : std::string("undetermined")) << '\n';
  };
  out << "conditional gaps |P(R | MS reject) - P(R | MS pass)|\n";
  gap("mc theta", d.mc_theta);
  gap("au theta", d.au_theta);
  gap("mc q    ", d.mc_q);
  gap("au q    ", d.au_q);
  out << "delta_max " << (d.delta_max ? fixed(*d.delta_max, 4) : "undetermined") << '\n';
  return out.str();
}

std::string config_digest(const ConfigDocument& doc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(render_config(doc))));
  return buf;
}

bool manifest_matches(const RunManifest& manifest, const ConfigDocument& doc) {
  return manifest.config_digest == config_digest(doc);
}

std::string manifest_json(const RunManifest& m) {
  json doc{{"command", m.command},
           {"config_digest", m.config_digest},
           {"tool_version", m.tool_version},
           {"master_seed", m.master_seed},
           {"started_at", m.started_at},
           {"finished_at", m.finished_at},
           {"workers", m.workers},
           {"outputs", m.outputs}};
  return doc.dump(2) + "\n";
}

RunManifest parse_manifest_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    RunManifest m;
    m.command = doc.at("command").get<std::string>();
    m.config_digest = doc.at("config_digest").get<std::string>();
    m.tool_version = doc.at("tool_version").get<std::string>();
    m.master_seed = doc.at("master_seed").get<std::uint64_t>();
    m.started_at = doc.at("started_at").get<std::string>();
    m.finished_at = doc.at("finished_at").get<std::string>();
    m.workers = doc.at("workers").get<unsigned>();
    m.outputs = doc.at("outputs").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid manifest: ") + e.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace mspretest
