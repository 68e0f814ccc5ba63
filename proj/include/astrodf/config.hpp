#pragma once

// Flat "dotted.key = value" configuration. Values are JSON literals
// (numbers, true/false, null, quoted strings, arrays); a bare word is read
// as a string. '#' starts a comment.
//
// Per-variant solver overrides use keys of the form
// variant.<name>.solver.<solver key>.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "astrodf/harness.hpp"

namespace astrodf::config {

struct KeyInfo {
  std::string key;
  nlohmann::json default_value;
  std::string help;
};

/// Every recognised key with its default, in display order.
const std::vector<KeyInfo>& known_keys();

class Config {
 public:
  Config();

  /// Parses a whole file; throws ConfigError naming the key (or line).
  static Config parse(std::istream& in);
  void merge_file(std::istream& in);

  /// Sets from text (JSON literal or bare word). Throws ConfigError for an
  /// unknown key.
  void set(const std::string& key, const std::string& text);
  void set_json(const std::string& key, nlohmann::json value);

  const nlohmann::json& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  /// All keys with effective values, one "key = value" line each, sorted.
  std::string resolved() const;

  const std::map<std::string, nlohmann::json>& values() const { return values_; }

 private:
  std::map<std::string, nlohmann::json> values_;
};

bool is_known_key(const std::string& key);

oracle::ProblemConfig problem_config(const Config& config);
solver::SolverParams solver_params(const Config& config, const std::string& variant = "");

/// Builds and validates the experiment spec; errors name the config key.
harness::ExperimentSpec experiment_spec(const Config& config);

/// Table of keys and defaults for --help.
std::string describe_keys();

}  // namespace astrodf::config
