#include "astrodf/config.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "astrodf/errors.hpp"

namespace astrodf::config {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splits "variant.<name>.<rest>" when <rest> is a known solver key.
bool split_variant_key(const std::string& key, std::string& variant, std::string& rest) {
  static const std::string prefix = "variant.";
  if (key.rfind(prefix, 0) != 0) return false;
  const auto dot = key.find('.', prefix.size());
  if (dot == std::string::npos || dot == prefix.size()) return false;
  variant = key.substr(prefix.size(), dot - prefix.size());
  rest = key.substr(dot + 1);
  return rest.rfind("solver.", 0) == 0 && is_known_key(rest);
}

json parse_value(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(key, "config key '" + key + "' has an empty value");
  try {
    return json::parse(t);
  } catch (const json::parse_error&) {
    return json(t);
  }
}

const json& lookup(const std::map<std::string, json>& values, const std::string& key) {
  const auto it = values.find(key);
  if (it == values.end()) throw ConfigError(key, "unknown config key '" + key + "'");
  return it->second;
}

double as_double(const std::string& key, const json& v) {
  if (!v.is_number()) throw ConfigError(key, "config key '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t as_uint(const std::string& key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0 && d == static_cast<double>(static_cast<std::uint64_t>(d))) {
      return static_cast<std::uint64_t>(d);
    }
  }
  throw ConfigError(key, "config key '" + key + "' must be a non-negative integer");
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) throw ConfigError(key, "config key '" + key + "' must be true or false");
  return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) throw ConfigError(key, "config key '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

const std::vector<KeyInfo>& known_keys() {
  static const std::vector<KeyInfo> keys{
      {"problem.name", "sphere", "test problem: sphere, rosenbrock or san"},
      {"problem.dim", 10, "problem dimension (san is fixed at 13)"},
      {"problem.noise_variance", 1.0, "sphere: variance of the additive normal noise"},
      {"problem.xi_mean", 1.0, "rosenbrock: mean of the multiplicative noise"},
      {"problem.xi_variance", 0.01, "rosenbrock: variance of the multiplicative noise"},
      {"solver.eta", 0.5, "model fitness threshold in (0,1)"},
      {"solver.theta", 0.1, "direct-search sufficient reduction constant"},
      {"solver.mu", 1000.0, "criticality threshold"},
      {"solver.gamma_expand", 1.5, "trust-region expansion factor (> 1)"},
      {"solver.gamma_shrink", 0.75, "trust-region shrink factor in (0,1)"},
      {"solver.kappa", nullptr, "adaptive sampling constant (null: tuned)"},
      {"solver.kappa_min", 0.01, "lower bound on the tuned kappa"},
      {"solver.delta0", nullptr, "initial radius (null: piloted)"},
      {"solver.delta_max", nullptr, "maximum radius (null: from random solutions)"},
      {"solver.lambda.base", 4, "sample-size lower bound floor (>= 2)"},
      {"solver.lambda.exponent", 1.5, "exponent of ln(k+2) in the lower bound (> 1)"},
      {"solver.lambda.scale", 2.0, "scale of ln(k+2)^exponent in the lower bound"},
      {"solver.direct_search", true, "accept the best design point when it wins"},
      {"experiment.id", "experiment", "label written to every CSV row"},
      {"experiment.budget", 1000, "oracle replications per macro-replication"},
      {"experiment.macroreps", 1, "macro-replications per variant"},
      {"experiment.postreps", 1, "post-replications per recommended solution"},
      {"experiment.seed", 0, "master seed for all random streams"},
      {"experiment.alpha", 0.1, "relative optimality gap for solvability"},
      {"experiment.variants", json::array({"refined"}), "solver variant names"},
      {"profile.steps", 20, "budget-fraction grid resolution"},
      {"profile.use_proxy_optimum", true,
       "use the best post-replicated value when f* is unknown"},
      {"run.threads", 0, "worker threads for macro-replications (0: all cores)"},
      {"run.out", ".", "output directory (default from ASTRODF_OUT)"},
  };
  return keys;
}

bool is_known_key(const std::string& key) {
  const auto& keys = known_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const KeyInfo& k) { return k.key == key; });
}

Config::Config() {
  for (const auto& k : known_keys()) values_[k.key] = k.default_value;
}

Config Config::parse(std::istream& in) {
  Config c;
  c.merge_file(in);
  return c;
}

void Config::merge_file(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // A '#' inside a quoted value is kept.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno),
                        "config line " + std::to_string(lineno) + " is not 'key = value'");
    }
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void Config::set(const std::string& key, const std::string& text) {
  set_json(key, parse_value(key, text));
}

void Config::set_json(const std::string& key, json value) {
  std::string variant, rest;
  if (!is_known_key(key) && !split_variant_key(key, variant, rest)) {
    throw ConfigError(key, "unknown config key '" + key + "'");
  }
  values_[key] = std::move(value);
}

const json& Config::get(const std::string& key) const { return lookup(values_, key); }

double Config::get_double(const std::string& key) const { return as_double(key, get(key)); }

std::optional<double> Config::get_optional_double(const std::string& key) const {
  const json& v = get(key);
  if (v.is_null()) return std::nullopt;
  return as_double(key, v);
}

std::uint64_t Config::get_uint(const std::string& key) const { return as_uint(key, get(key)); }
bool Config::get_bool(const std::string& key) const { return as_bool(key, get(key)); }
std::string Config::get_string(const std::string& key) const { return as_string(key, get(key)); }

std::vector<std::string> Config::get_string_list(const std::string& key) const {
  const json& v = get(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw ConfigError(key, "config key '" + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& item : v) out.push_back(as_string(key, item));
  return out;
}

std::string Config::resolved() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value.dump() << '\n';
  return out.str();
}

oracle::ProblemConfig problem_config(const Config& config) {
  oracle::ProblemConfig p;
  p.name = config.get_string("problem.name");
  p.dim = config.get_uint("problem.dim");
  p.noise_variance = config.get_double("problem.noise_variance");
  p.xi_mean = config.get_double("problem.xi_mean");
  p.xi_variance = config.get_double("problem.xi_variance");
  if (p.name != "sphere" && p.name != "rosenbrock" && p.name != "san") {
    throw ConfigError("problem.name", "problem.name must be sphere, rosenbrock or san (got '" +
                                          p.name + "')");
  }
  if (p.name == "san") p.dim = oracle::san::kArcs;
  if (p.name == "sphere" && p.dim < 1) throw ConfigError("problem.dim", "problem.dim must be >= 1");
  if (p.name == "rosenbrock" && p.dim < 2) {
    throw ConfigError("problem.dim", "problem.dim must be >= 2 for rosenbrock");
  }
  if (p.noise_variance < 0) {
    throw ConfigError("problem.noise_variance", "problem.noise_variance must be >= 0");
  }
  if (p.xi_variance < 0) throw ConfigError("problem.xi_variance", "problem.xi_variance must be >= 0");
  return p;
}

solver::SolverParams solver_params(const Config& config, const std::string& variant) {
  auto value = [&](const std::string& key) -> std::pair<std::string, const json*> {
    if (!variant.empty()) {
      const std::string vkey = "variant." + variant + "." + key;
      const auto it = config.values().find(vkey);
      if (it != config.values().end()) return {vkey, &it->second};
    }
    return {key, &config.get(key)};
  };
  auto dbl = [&](const std::string& key) {
    const auto [k, v] = value(key);
    return as_double(k, *v);
  };
  auto opt = [&](const std::string& key) -> std::optional<double> {
    const auto [k, v] = value(key);
    if (v->is_null()) return std::nullopt;
    return as_double(k, *v);
  };

  solver::SolverParams p;
  p.eta = dbl("solver.eta");
  p.theta = dbl("solver.theta");
  p.mu = dbl("solver.mu");
  p.gamma_expand = dbl("solver.gamma_expand");
  p.gamma_shrink = dbl("solver.gamma_shrink");
  p.kappa = opt("solver.kappa");
  p.kappa_min = dbl("solver.kappa_min");
  p.delta0 = opt("solver.delta0");
  p.delta_max = opt("solver.delta_max");
  {
    const auto [k, v] = value("solver.lambda.base");
    p.lambda.base = as_uint(k, *v);
  }
  p.lambda.exponent = dbl("solver.lambda.exponent");
  p.lambda.scale = dbl("solver.lambda.scale");
  {
    const auto [k, v] = value("solver.direct_search");
    p.direct_search = as_bool(k, *v);
  }
  p.seed = config.get_uint("experiment.seed");
  try {
    p.validate();
  } catch (const ParameterError& e) {
    // Messages start with the offending key.
    const std::string what = e.what();
    std::string key = what.substr(0, what.find(' '));
    if (!variant.empty()) key = "variant." + variant + "." + key;
    throw ConfigError(key, what);
  }
  return p;
}

harness::ExperimentSpec experiment_spec(const Config& config) {
  harness::ExperimentSpec spec;
  spec.experiment_id = config.get_string("experiment.id");
  spec.problem = problem_config(config);
  spec.budget = config.get_uint("experiment.budget");
  spec.macroreps = config.get_uint("experiment.macroreps");
  spec.postreps = config.get_uint("experiment.postreps");
  spec.seed = config.get_uint("experiment.seed");
  spec.alpha = config.get_double("experiment.alpha");
  if (spec.macroreps < 1) throw ConfigError("experiment.macroreps", "experiment.macroreps must be >= 1");
  if (spec.postreps < 1) throw ConfigError("experiment.postreps", "experiment.postreps must be >= 1");
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) {
    throw ConfigError("experiment.alpha", "experiment.alpha must lie in (0,1]");
  }

  const auto names = config.get_string_list("experiment.variants");
  if (names.empty()) throw ConfigError("experiment.variants", "experiment.variants is empty");
  for (const auto& name : names) {
    if (name.empty() || name.find_first_of(".,\" ") != std::string::npos) {
      throw ConfigError("experiment.variants", "invalid variant name '" + name + "'");
    }
    if (std::count(names.begin(), names.end(), name) > 1) {
      throw ConfigError("experiment.variants", "duplicate variant name '" + name + "'");
    }
    spec.variants.push_back(harness::Variant{name, solver_params(config, name)});
  }
  for (const auto& [key, value] : config.values()) {
    std::string variant, rest;
    if (split_variant_key(key, variant, rest) &&
        std::find(names.begin(), names.end(), variant) == names.end()) {
      throw ConfigError(key, "override '" + key + "' names a variant not in experiment.variants");
    }
  }
  return spec;
}

std::string describe_keys() {
  std::string out = "Config keys (default):\n";
  for (const auto& k : known_keys()) {
    out += fmt::format("  {:<28} {:<14} {}\n", k.key, k.default_value.dump(), k.help);
  }
  out += "  variant.<name>.solver.<key>  overrides a solver key for one variant\n";
  return out;
}

}  // namespace astrodf::config
