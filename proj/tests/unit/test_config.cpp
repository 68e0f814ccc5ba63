#include <doctest.h>

#include <sstream>

#include "astrodf/config.hpp"
#include "astrodf/errors.hpp"

using namespace astrodf;
using namespace astrodf::config;

namespace {

Config parse(const std::string& text) {
  std::istringstream in(text);
  return Config::parse(in);
}

}  // namespace

TEST_CASE("defaults") {
  const Config c;
  CHECK(c.get_string("problem.name") == "sphere");
  CHECK(c.get_uint("problem.dim") == 10);
  CHECK(c.get_double("solver.eta") == 0.5);
  CHECK_FALSE(c.get_optional_double("solver.kappa").has_value());
  CHECK(c.get_string_list("experiment.variants") == std::vector<std::string>{"refined"});
  const auto p = solver_params(c);
  CHECK(p.gamma_expand == 1.5);
  CHECK(p.gamma_shrink == 0.75);
  CHECK(p.theta == 0.1);
  CHECK(p.mu == 1000.0);
  CHECK(p.direct_search);
}

TEST_CASE("file parsing") {
  const Config c = parse(
      "# comment line\n"
      "problem.name = rosenbrock   # bare word\n"
      "problem.dim = 20\n"
      "\n"
      "experiment.id = \"run #3\"\n"
      "solver.delta0 = 0.5\n"
      "experiment.variants = [\"a\", \"b\"]\n"
      "variant.b.solver.direct_search = false\n");
  CHECK(c.get_string("problem.name") == "rosenbrock");
  CHECK(c.get_uint("problem.dim") == 20);
  CHECK(c.get_string("experiment.id") == "run #3");
  CHECK(c.get_optional_double("solver.delta0") == 0.5);
  const auto spec = experiment_spec(c);
  REQUIRE(spec.variants.size() == 2);
  CHECK(spec.variants[0].params.direct_search);
  CHECK_FALSE(spec.variants[1].params.direct_search);
  CHECK(spec.variants[1].params.delta0 == 0.5);
  CHECK(spec.problem.name == "rosenbrock");
}

TEST_CASE("errors name the offending key") {
  auto key_of = [](auto fn) -> std::string {
    try {
      fn();
    } catch (const ConfigError& e) {
      return e.key();
    }
    return "<no error>";
  };
  CHECK(key_of([] { parse("solver.etaa = 0.3\n"); }) == "solver.etaa");
  CHECK(key_of([] { parse("no equals sign\n"); }) == "line 1");
  CHECK(key_of([] { solver_params(parse("solver.eta = 2\n")); }) == "solver.eta");
  CHECK(key_of([] { solver_params(parse("solver.eta = \"x\"\n")); }) == "solver.eta");
  CHECK(key_of([] { experiment_spec(parse("experiment.postreps = 0\n")); }) == "experiment.postreps");
  CHECK(key_of([] { experiment_spec(parse("problem.name = cube\n")); }) == "problem.name");
  CHECK(key_of([] { experiment_spec(parse("variant.ghost.solver.eta = 0.2\n")); }) ==
        "variant.ghost.solver.eta");
  CHECK(key_of([] {
          experiment_spec(parse("experiment.variants = [\"a\"]\nvariant.a.solver.gamma_shrink = 2\n"));
        }) == "variant.a.solver.gamma_shrink");
  CHECK(key_of([] { parse("variant.a.problem.dim = 3\n"); }) == "variant.a.problem.dim");
  CHECK(key_of([] { parse("problem.dim =\n"); }) == "problem.dim");
}

TEST_CASE("later settings override earlier ones") {
  Config c = parse("problem.dim = 4\n");
  c.set("problem.dim", "6");
  CHECK(c.get_uint("problem.dim") == 6);
  c.set_json("solver.direct_search", false);
  CHECK_FALSE(solver_params(c).direct_search);
}

TEST_CASE("resolved config lists every key once") {
  const Config c = parse("problem.dim = 3\n");
  const std::string text = c.resolved();
  for (const auto& k : known_keys()) CHECK(text.find(k.key + " = ") != std::string::npos);
  CHECK(text.find("problem.dim = 3\n") != std::string::npos);
  // The resolved text parses back to the same values.
  const Config back = parse(text);
  CHECK(back.resolved() == text);
}

TEST_CASE("help text enumerates every key with its default") {
  const std::string help = describe_keys();
  for (const auto& k : known_keys()) {
    CHECK(help.find(k.key) != std::string::npos);
    CHECK(help.find(k.default_value.dump()) != std::string::npos);
  }
}
