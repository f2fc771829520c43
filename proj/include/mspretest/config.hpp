#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mspretest/lambda_lab.hpp"
#include "mspretest/mc_engine.hpp"

namespace mspretest {

/// Malformed or invalid configuration. `line()` is 1-based and 0 when the
/// problem is not tied to a line; `key()` is the dotted path of the
/// offending setting, e.g. "scenario.t3-null.dist1.df", when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0, std::string key = {});

  std::size_t line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

struct ConfigDocument {
  std::vector<ScenarioConfig> scenarios;
  std::vector<MixtureSpec> mixtures;

  bool operator==(const ConfigDocument&) const = default;
};

// Sectioned key = value text:
//
//   [defaults]              settings shared by all sections
//   replicates = 20000
//
//   [scenario normal-null]
//   hypothesis = null
//   dist1.kind = normal
//   dist1.mu = 1
//   ...
//
//   [mixture normal-t3]
//   theta.dist1.kind = normal
//   q.dist1.kind = shifted_t
//   lambda_grid = 0, 0.5, 1
//
// '#' starts a comment. Unknown keys, duplicate keys and duplicate ids are
// errors; every section is validated.
ConfigDocument parse_config(std::string_view text);
ConfigDocument load_config(const std::filesystem::path& path);

// Canonical text; parse_config(render_config(doc)) == doc.
std::string render_config(const ConfigDocument& doc);

// Six "name = value" lines, one per LemmaInputs field.
LemmaInputs parse_lemma_inputs(std::string_view text);
std::string render_lemma_inputs(const LemmaInputs& inputs);

// "scenario_id = weight" lines, in file order.
std::vector<std::pair<std::string, double>> parse_weights(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace mspretest
