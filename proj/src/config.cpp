#include "mspretest/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "mspretest/errors.hpp"

namespace mspretest {
namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string kind;  // "defaults", "scenario", "mixture" or "" for unsectioned files
  std::string id;
  std::size_t line = 0;
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<Section> tokenize(std::string_view text, bool sections_allowed) {
  std::vector<Section> out;
  if (!sections_allowed) out.emplace_back();
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (!sections_allowed) throw ConfigError("sections are not allowed here", line_no);
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      const std::string_view inner = trim(line.substr(1, line.size() - 2));
      const auto space = inner.find_first_of(" \t");
      Section s;
      s.line = line_no;
      s.kind = std::string(inner.substr(0, space));
      if (space != std::string_view::npos) s.id = std::string(trim(inner.substr(space)));
      if (s.kind == "defaults") {
        if (!s.id.empty()) throw ConfigError("[defaults] takes no id", line_no);
      } else if (s.kind == "scenario" || s.kind == "mixture") {
        if (s.id.empty()) throw ConfigError("[" + s.kind + "] needs an id", line_no);
        if (s.id.find_first_of(" \t,\"") != std::string::npos)
          throw ConfigError("id must not contain spaces, commas or quotes", line_no);
      } else {
        throw ConfigError("unknown section '" + s.kind + "'", line_no);
      }
      out.push_back(std::move(s));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("missing key", line_no);
    if (out.empty()) throw ConfigError("'" + key + "' appears before any section", line_no, key);
    Section& s = out.back();
    if (s.entries.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no, key);
    s.entries[key] = {value, line_no};
    s.order.push_back(key);
  }
  return out;
}

std::string path_of(const Section& s, const std::string& key) {
  return s.kind.empty() ? key : s.kind + (s.id.empty() ? "" : "." + s.id) + "." + key;
}

double to_double(const std::string& text, std::size_t line, const std::string& key) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw ConfigError("'" + text + "' is not a finite number", line, key);
  return v;
}

std::uint64_t to_uint(const std::string& text, std::size_t line, const std::string& key) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("'" + text + "' is not a non-negative integer", line, key);
  return v;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

// Applies one setting; unknown keys return false.
class Reader {
 public:
  explicit Reader(const Section& s) : section_(s) {}

  template <typename F>
  void with(const std::string& key, F&& apply) const {
    const Entry& e = section_.entries.at(key);
    try {
      apply(e.value, e.line);
    } catch (const DomainError& err) {
      throw ConfigError(err.what(), e.line, path_of(section_, key));
    }
  }

 private:
  const Section& section_;
};

bool apply_distribution(DistributionSpec& d, const std::string& field, const std::string& value,
                        std::size_t line, const std::string& path) {
  if (field == "kind") d.kind = distribution_kind_from_string(value);
  else if (field == "mu") d.mu = to_double(value, line, path);
  else if (field == "sigma") d.sigma = to_double(value, line, path);
  else if (field == "df") d.df = to_double(value, line, path);
  else if (field == "shape") d.shape = to_double(value, line, path);
  else if (field == "variance") d.variance = to_double(value, line, path);
  else return false;
  return true;
}

struct Common {
  std::optional<std::size_t> n1, n2, replicates, permutation_b;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha_ms, alpha;
  std::optional<PermutationMethod> permutation_method;
};

bool apply_common(Common& c, const std::string& key, const std::string& value, std::size_t line,
                  const std::string& path) {
  if (key == "n1") c.n1 = to_uint(value, line, path);
  else if (key == "n2") c.n2 = to_uint(value, line, path);
  else if (key == "replicates") c.replicates = to_uint(value, line, path);
  else if (key == "seed") c.seed = to_uint(value, line, path);
  else if (key == "alpha_ms") c.alpha_ms = to_double(value, line, path);
  else if (key == "alpha") c.alpha = to_double(value, line, path);
  else if (key == "permutation_b") c.permutation_b = to_uint(value, line, path);
  else if (key == "permutation_method") c.permutation_method = permutation_method_from_string(value);
  else return false;
  return true;
}

void merge(Common& into, const Common& from) {
  if (from.n1) into.n1 = from.n1;
  if (from.n2) into.n2 = from.n2;
  if (from.replicates) into.replicates = from.replicates;
  if (from.permutation_b) into.permutation_b = from.permutation_b;
  if (from.seed) into.seed = from.seed;
  if (from.alpha_ms) into.alpha_ms = from.alpha_ms;
  if (from.alpha) into.alpha = from.alpha;
  if (from.permutation_method) into.permutation_method = from.permutation_method;
}

Common read_common(const Section& s, std::set<std::string>& consumed) {
  Common c;
  Reader r(s);
  for (const std::string& key : s.order) {
    r.with(key, [&](const std::string& value, std::size_t line) {
      if (apply_common(c, key, value, line, path_of(s, key))) consumed.insert(key);
    });
  }
  return c;
}

ProcedureConfig procedure_of(const Common& c, const Section& s) {
  ProcedureConfig p;
  auto level = [&](std::optional<double> v, const char* key) {
    if (!v) return Probability(0.05);
    try {
      return Probability(*v);
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), 0, path_of(s, key));
    }
  };
  p.alpha_ms = level(c.alpha_ms, "alpha_ms");
  p.alpha = level(c.alpha, "alpha");
  return p;
}

void check_dist(const DistributionSpec& d, const Section& s, const std::string& prefix) {
  try {
    d.validate();
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    const std::string field = msg.substr(0, msg.find(' '));
    throw ConfigError(msg, 0, path_of(s, prefix + "." + field));
  }
}

void require_key(const Section& s, const std::string& key) {
  if (!s.entries.count(key)) throw ConfigError("missing required key '" + key + "'", s.line, path_of(s, key));
}

void reject_unknown(const Section& s, const std::set<std::string>& consumed) {
  for (const std::string& key : s.order) {
    if (!consumed.count(key))
      throw ConfigError("unknown key '" + key + "'", s.entries.at(key).line, path_of(s, key));
  }
}

std::vector<double> parse_grid(const std::string& value, std::size_t line, const std::string& path) {
  std::vector<double> grid;
  std::string_view rest = value;
  while (true) {
    const auto comma = rest.find(',');
    const std::string item(trim(rest.substr(0, comma)));
    if (item.empty()) throw ConfigError("empty lambda_grid entry", line, path);
    grid.push_back(to_double(item, line, path));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return grid;
}

ScenarioConfig build_scenario(const Section& s, const Common& defaults) {
  std::set<std::string> consumed;
  Common c = defaults;
  merge(c, read_common(s, consumed));

  ScenarioConfig cfg;
  cfg.id = s.id;
  cfg.label = s.id;
  require_key(s, "dist1.kind");
  require_key(s, "dist2.kind");
  Reader r(s);
  for (const std::string& key : s.order) {
    if (consumed.count(key)) continue;
    const std::string path = path_of(s, key);
    r.with(key, [&](const std::string& value, std::size_t line) {
      bool known = true;
      if (key == "label") cfg.label = value;
      else if (key == "hypothesis") cfg.hypothesis = hypothesis_from_string(value);
      else if (key.rfind("dist1.", 0) == 0) known = apply_distribution(cfg.dist1, key.substr(6), value, line, path);
      else if (key.rfind("dist2.", 0) == 0) known = apply_distribution(cfg.dist2, key.substr(6), value, line, path);
      else known = false;
      if (known) consumed.insert(key);
    });
  }
  reject_unknown(s, consumed);

  if (c.n1) cfg.n1 = *c.n1;
  if (c.n2) cfg.n2 = *c.n2;
  if (c.replicates) cfg.replicates = *c.replicates;
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.permutation_b) cfg.permutation_b = *c.permutation_b;
  if (c.permutation_method) cfg.permutation_method = *c.permutation_method;
  cfg.procedure = procedure_of(c, s);

  check_dist(cfg.dist1, s, "dist1");
  check_dist(cfg.dist2, s, "dist2");
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    throw ConfigError(msg, s.line, path_of(s, msg.substr(0, msg.find(' '))));
  }
  return cfg;
}

MixtureSpec build_mixture(const Section& s, const Common& defaults) {
  std::set<std::string> consumed;
  Common c = defaults;
  merge(c, read_common(s, consumed));
  for (const char* key : {"permutation_b", "permutation_method"}) {
    if (s.entries.count(key))
      throw ConfigError(std::string("'") + key + "' does not apply to mixtures", s.entries.at(key).line,
                        path_of(s, key));
  }

  MixtureSpec m;
  m.id = s.id;
  m.theta.label = "theta";
  m.q.label = "q";
  m.lambda_grid = MixtureSpec::default_grid();
  for (const char* key : {"theta.dist1.kind", "theta.dist2.kind", "q.dist1.kind", "q.dist2.kind"}) require_key(s, key);
  Reader r(s);
  for (const std::string& key : s.order) {
    if (consumed.count(key)) continue;
    const std::string path = path_of(s, key);
    r.with(key, [&](const std::string& value, std::size_t line) {
      bool known = true;
      if (key == "lambda_grid") {
        m.lambda_grid = parse_grid(value, line, path);
      } else if (key.rfind("theta.", 0) == 0 || key.rfind("q.", 0) == 0) {
        const bool theta = key[0] == 't';
        ComponentScenario& comp = theta ? m.theta : m.q;
        const std::string rest = key.substr(theta ? 6 : 2);
        if (rest == "label") comp.label = value;
        else if (rest.rfind("dist1.", 0) == 0) known = apply_distribution(comp.dist1, rest.substr(6), value, line, path);
        else if (rest.rfind("dist2.", 0) == 0) known = apply_distribution(comp.dist2, rest.substr(6), value, line, path);
        else known = false;
      } else {
        known = false;
      }
      if (known) consumed.insert(key);
    });
  }
  reject_unknown(s, consumed);

  if (c.n1) m.n1 = *c.n1;
  if (c.n2) m.n2 = *c.n2;
  if (c.replicates) m.replicates = *c.replicates;
  if (c.seed) m.master_seed = *c.seed;
  m.procedure = procedure_of(c, s);

  check_dist(m.theta.dist1, s, "theta.dist1");
  check_dist(m.theta.dist2, s, "theta.dist2");
  check_dist(m.q.dist1, s, "q.dist1");
  check_dist(m.q.dist2, s, "q.dist2");
  try {
    m.validate();
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    throw ConfigError(msg, s.line, path_of(s, msg.substr(0, msg.find(' '))));
  }
  return m;
}

bool relevant(DistributionKind kind, std::string_view field) {
  if (field == "mu") return true;
  switch (kind) {
    case DistributionKind::Normal: return field == "sigma";
    case DistributionKind::ShiftedT: return field == "df";
    case DistributionKind::Exponential: return false;
    case DistributionKind::SkewNormal: return field == "shape" || field == "variance";
  }
  return false;
}

void render_distribution(std::ostringstream& out, const std::string& prefix, const DistributionSpec& d) {
  const DistributionSpec base;
  out << prefix << ".kind = " << to_string(d.kind) << '\n';
  const std::array<std::pair<const char*, std::pair<double, double>>, 5> fields{{
      {"mu", {d.mu, base.mu}},
      {"sigma", {d.sigma, base.sigma}},
      {"df", {d.df, base.df}},
      {"shape", {d.shape, base.shape}},
      {"variance", {d.variance, base.variance}},
  }};
  for (const auto& [name, values] : fields) {
    if (relevant(d.kind, name) || values.first != values.second)
      out << prefix << '.' << name << " = " << format_double(values.first) << '\n';
  }
}

void render_levels(std::ostringstream& out, const ProcedureConfig& p) {
  out << "alpha_ms = " << format_double(p.alpha_ms) << '\n';
  out << "alpha = " << format_double(p.alpha) << '\n';
}

std::map<std::string, Entry> flat_entries(std::string_view text) {
  return tokenize(text, false).front().entries;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, std::size_t line, std::string key)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? "" : key + ": ") + message),
      line_(line),
      key_(std::move(key)) {}

ConfigDocument parse_config(std::string_view text) {
  const std::vector<Section> sections = tokenize(text, true);
  Common defaults;
  const Section* defaults_section = nullptr;
  for (const Section& s : sections) {
    if (s.kind != "defaults") continue;
    if (defaults_section) throw ConfigError("more than one [defaults] section", s.line);
    defaults_section = &s;
    std::set<std::string> consumed;
    defaults = read_common(s, consumed);
    reject_unknown(s, consumed);
  }

  ConfigDocument doc;
  std::set<std::string> ids;
  for (const Section& s : sections) {
    if (s.kind == "defaults") continue;
    if (!ids.insert(s.kind + ":" + s.id).second)
      throw ConfigError("duplicate " + s.kind + " id '" + s.id + "'", s.line);
    if (s.kind == "scenario") {
      doc.scenarios.push_back(build_scenario(s, defaults));
    } else {
      Common c = defaults;
      c.permutation_b.reset();
      c.permutation_method.reset();
      doc.mixtures.push_back(build_mixture(s, c));
    }
  }
  if (doc.scenarios.empty() && doc.mixtures.empty()) throw ConfigError("no scenarios defined");
  return doc;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ConfigDocument load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

std::string render_config(const ConfigDocument& doc) {
  std::ostringstream out;
  bool first = true;
  auto separate = [&] {
    if (!first) out << '\n';
    first = false;
  };
  for (const ScenarioConfig& c : doc.scenarios) {
    separate();
    out << "[scenario " << c.id << "]\n";
    out << "label = " << c.label << '\n';
    out << "hypothesis = " << to_string(c.hypothesis) << '\n';
    render_distribution(out, "dist1", c.dist1);
    render_distribution(out, "dist2", c.dist2);
    out << "n1 = " << c.n1 << '\n';
    out << "n2 = " << c.n2 << '\n';
    out << "replicates = " << c.replicates << '\n';
    out << "seed = " << c.master_seed << '\n';
    render_levels(out, c.procedure);
    out << "permutation_b = " << c.permutation_b << '\n';
    out << "permutation_method = " << to_string(c.permutation_method) << '\n';
  }
  for (const MixtureSpec& m : doc.mixtures) {
    separate();
    out << "[mixture " << m.id << "]\n";
    out << "theta.label = " << m.theta.label << '\n';
    render_distribution(out, "theta.dist1", m.theta.dist1);
    render_distribution(out, "theta.dist2", m.theta.dist2);
    out << "q.label = " << m.q.label << '\n';
    render_distribution(out, "q.dist1", m.q.dist1);
    render_distribution(out, "q.dist2", m.q.dist2);
    out << "n1 = " << m.n1 << '\n';
    out << "n2 = " << m.n2 << '\n';
    out << "replicates = " << m.replicates << '\n';
    out << "seed = " << m.master_seed << '\n';
    render_levels(out, m.procedure);
    out << "lambda_grid = ";
    for (std::size_t i = 0; i < m.lambda_grid.size(); ++i)
      out << (i ? ", " : "") << format_double(m.lambda_grid[i]);
    out << '\n';
  }
  return out.str();
}

LemmaInputs parse_lemma_inputs(std::string_view text) {
  const auto entries = flat_entries(text);
  LemmaInputs in;
  const std::array<std::pair<const char*, double*>, 6> fields{{
      {"p_mc_theta", &in.p_mc_theta},
      {"p_au_theta", &in.p_au_theta},
      {"p_mc_q", &in.p_mc_q},
      {"p_au_q", &in.p_au_q},
      {"alpha_ms", &in.alpha_ms},
      {"alpha_ms_star", &in.alpha_ms_star},
  }};
  for (const auto& [key, entry] : entries) {
    bool known = false;
    for (const auto& [name, target] : fields) known = known || key == name;
    if (!known) throw ConfigError("unknown key '" + key + "'", entry.line, key);
  }
  for (const auto& [name, target] : fields) {
    const auto it = entries.find(name);
    if (it == entries.end()) throw ConfigError(std::string("missing required key '") + name + "'", 0, name);
    *target = to_double(it->second.value, it->second.line, name);
    if (!(*target >= 0.0 && *target <= 1.0))
      throw ConfigError("must lie in [0, 1]", it->second.line, name);
  }
  return in;
}

std::string render_lemma_inputs(const LemmaInputs& in) {
  std::ostringstream out;
  out << "p_mc_theta = " << format_double(in.p_mc_theta) << '\n'
      << "p_au_theta = " << format_double(in.p_au_theta) << '\n'
      << "p_mc_q = " << format_double(in.p_mc_q) << '\n'
      << "p_au_q = " << format_double(in.p_au_q) << '\n'
      << "alpha_ms = " << format_double(in.alpha_ms) << '\n'
      << "alpha_ms_star = " << format_double(in.alpha_ms_star) << '\n';
  return out.str();
}

std::vector<std::pair<std::string, double>> parse_weights(std::string_view text) {
  const Section s = tokenize(text, false).front();
  if (s.order.empty()) throw ConfigError("no weights defined");
  std::vector<std::pair<std::string, double>> out;
  for (const std::string& key : s.order) {
    const Entry& e = s.entries.at(key);
    const double w = to_double(e.value, e.line, key);
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("weight must lie in [0, 1]", e.line, key);
    out.emplace_back(key, w);
  }
  return out;
}

}  // namespace mspretest
