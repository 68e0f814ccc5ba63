#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <omp.h>

#include "astrodf/config.hpp"
#include "astrodf/errors.hpp"
#include "astrodf/harness.hpp"
#include "astrodf/model.hpp"
#include "astrodf/selftest.hpp"
#include "astrodf/solver.hpp"

namespace astrodf::cli {

namespace {

namespace fs = std::filesystem;

// Flags shared by solve and experiment; each maps onto one config key.
struct CommonFlags {
  std::string config_path;
  std::optional<std::string> problem;
  std::optional<std::uint64_t> dim;
  std::optional<std::uint64_t> budget;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> macroreps;
  std::optional<std::uint64_t> postreps;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool no_direct_search = false;
  std::vector<std::string> overrides;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool experiment_flags) {
  cmd->add_option("--config", f.config_path, "config file of dotted.key = value lines");
  cmd->add_option("--problem", f.problem, "problem.name: sphere, rosenbrock or san");
  cmd->add_option("--dim", f.dim, "problem.dim");
  cmd->add_option("--budget", f.budget, "experiment.budget (replications per macro-rep)");
  cmd->add_option("--seed", f.seed, "experiment.seed");
  cmd->add_option("--out", f.out, "run.out output directory");
  cmd->add_flag("--no-direct-search", f.no_direct_search, "solver.direct_search = false");
  cmd->add_option("--set", f.overrides, "override any key: --set dotted.key=value");
  if (experiment_flags) {
    cmd->add_option("--macroreps", f.macroreps, "experiment.macroreps");
    cmd->add_option("--postreps", f.postreps, "experiment.postreps");
    cmd->add_option("--threads", f.threads, "run.threads (0: all cores)");
  }
}

config::Config build_config(const CommonFlags& f) {
  config::Config c;
  if (const char* env = std::getenv("ASTRODF_OUT"); env && *env) c.set_json("run.out", env);
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("--config", "cannot open config file '" + f.config_path + "'");
    c.merge_file(in);
  }
  if (f.problem) c.set_json("problem.name", *f.problem);
  if (f.dim) c.set_json("problem.dim", *f.dim);
  if (f.budget) c.set_json("experiment.budget", *f.budget);
  if (f.seed) c.set_json("experiment.seed", *f.seed);
  if (f.macroreps) c.set_json("experiment.macroreps", *f.macroreps);
  if (f.postreps) c.set_json("experiment.postreps", *f.postreps);
  if (f.out) c.set_json("run.out", *f.out);
  if (f.threads) c.set_json("run.threads", *f.threads);
  if (f.no_direct_search) c.set_json("solver.direct_search", false);
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(kv, "--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

fs::path prepare_out_dir(const config::Config& c) {
  fs::path dir = c.get_string("run.out");
  fs::create_directories(dir);
  std::ofstream(dir / "resolved_config") << c.resolved();
  return dir;
}

// Checks the radius dynamics and budget accounting of a finished run.
void check_run_invariants(const solver::SolverState& state, const solver::SolverParams& params) {
  std::uint64_t samples = state.tuning_spend + state.initial_spend;
  for (const auto& rec : state.history) {
    samples += rec.samples;
    if (!(rec.delta > 0.0 && rec.delta <= *params.delta_max * (1 + 1e-12))) {
      throw InvariantViolation("radius left (0, delta_max] at iteration " + std::to_string(rec.k));
    }
    const double expected =
        rec.outcome == solver::Outcome::budget_exhausted ? rec.delta
        : solver::is_success(rec.outcome) ? std::min(params.gamma_expand * rec.delta, *params.delta_max)
                                          : params.gamma_shrink * rec.delta;
    if (rec.delta_next != expected) {
      throw InvariantViolation("radius update broke at iteration " + std::to_string(rec.k));
    }
  }
  if (samples != state.budget.spent) {
    throw InvariantViolation("budget accounting: recorded samples " + std::to_string(samples) +
                             " != spent " + std::to_string(state.budget.spent));
  }
}

int threads_from(const config::Config& c) {
  const auto t = c.get_uint("run.threads");
  return t == 0 ? omp_get_num_procs() : static_cast<int>(t);
}

std::map<std::string, double> optimum_map(const std::vector<harness::TrajectoryRow>& rows,
                                          const config::Config& c, std::ostream& err) {
  std::map<std::string, double> out;
  std::map<std::string, double> best;
  for (const auto& r : rows) {
    auto [it, inserted] = best.try_emplace(r.problem, r.post_mean);
    if (!inserted) it->second = std::min(it->second, r.post_mean);
  }
  for (const auto& [name, value] : best) {
    std::optional<double> known;
    if (name == "sphere") known = 0.0;
    if (known) {
      out[name] = *known;
    } else if (c.get_bool("profile.use_proxy_optimum")) {
      err << "note: problem '" << name << "' has no known optimum; using best post-replicated value "
          << value << " as f*\n";
      out[name] = value;
    }
  }
  return out;
}

std::map<std::string, double> budget_map(const std::vector<harness::TrajectoryRow>& rows) {
  std::map<std::string, double> out;
  for (const auto& r : rows) {
    auto& b = out[r.problem];
    b = std::max(b, static_cast<double>(r.cumulative_budget));
  }
  return out;
}

int cmd_solve(const CommonFlags& flags, std::ostream& out) {
  const config::Config c = build_config(flags);
  const fs::path dir = prepare_out_dir(c);
  const auto problem = oracle::make_problem(config::problem_config(c));
  const auto params = config::solver_params(c);
  const std::uint64_t budget = c.get_uint("experiment.budget");

  auto tuned = solver::tune_and_initialize(*problem, params, budget, 0);
  solver::run(tuned.state, tuned.params, *problem);
  check_run_invariants(tuned.state, tuned.params);

  std::vector<harness::IterationRow> rows;
  for (const auto& rec : tuned.state.history) {
    rows.push_back({c.get_string("experiment.id"), "solve", problem->name(), 0, rec});
  }
  std::ofstream f(dir / "iterations.csv");
  harness::write_iterations_csv(f, rows);

  const auto& inc = tuned.state.incumbent;
  out << "problem " << problem->name() << " d=" << problem->dimension() << " budget " << budget
      << "\niterations " << tuned.state.history.size() << ", delta0 " << *tuned.params.delta0
      << ", final delta " << tuned.state.delta << "\nincumbent estimate " << inc.record.mean
      << " (n=" << inc.record.count << ")\n";
  if (const auto f_true = problem->true_objective(inc.x)) out << "true objective " << *f_true << '\n';
  return kExitOk;
}

int cmd_experiment(CommonFlags flags, const std::string& spec_path, std::ostream& out,
                   std::ostream& err) {
  if (!spec_path.empty()) flags.config_path = spec_path;
  const config::Config c = build_config(flags);
  const harness::ExperimentSpec spec = config::experiment_spec(c);
  const fs::path dir = prepare_out_dir(c);

  const auto result = harness::run_experiment(spec, threads_from(c));
  const auto rows = result.trajectory_rows();
  const auto grid = harness::fraction_grid(c.get_uint("profile.steps"));
  {
    std::ofstream f(dir / "results.csv");
    harness::write_results_csv(f, rows);
  }
  {
    std::ofstream f(dir / "iterations.csv");
    harness::write_iterations_csv(f, result.iteration_rows());
  }
  {
    std::ofstream f(dir / "trajectory.csv");
    harness::write_trajectory_csv(f, result, grid);
  }
  {
    std::ofstream f(dir / "profile.csv");
    harness::write_profile_csv(
        f, harness::solvability_profile(rows, spec.alpha, optimum_map(rows, c, err),
                                        budget_map(rows), grid));
  }
  for (std::size_t v = 0; v < spec.variants.size(); ++v) {
    const auto band = harness::mean_trajectory(result, v, {1.0});
    out << spec.variants[v].name << ": final mean objective " << band[0].mean << " +/- "
        << band[0].half_width << " over " << spec.macroreps << " macro-reps\n";
  }
  return kExitOk;
}

int cmd_profile(const CommonFlags& flags, const std::string& results_path,
                std::optional<double> alpha, std::ostream& out, std::ostream& err) {
  config::Config c = build_config(flags);
  if (alpha) c.set_json("experiment.alpha", *alpha);
  const double a = c.get_double("experiment.alpha");
  if (!(a > 0.0 && a <= 1.0)) throw ConfigError("experiment.alpha", "alpha must lie in (0,1]");
  std::ifstream in(results_path);
  if (!in) throw ConfigError("--results", "cannot open results file '" + results_path + "'");
  const auto rows = harness::read_results_csv(in);
  const fs::path dir = prepare_out_dir(c);
  const auto points = harness::solvability_profile(
      rows, a, optimum_map(rows, c, err), budget_map(rows),
      harness::fraction_grid(c.get_uint("profile.steps")));
  std::ofstream f(dir / "profile.csv");
  harness::write_profile_csv(f, points);
  out << "wrote " << points.size() << " profile points to " << (dir / "profile.csv").string() << '\n';
  return kExitOk;
}

int cmd_selftest(const std::string& fault, std::ostream& out, std::ostream& err) {
  if (fault == "gradient_sign") {
    model::testing::set_gradient_sign_fault(true);
  } else if (!fault.empty()) {
    throw ConfigError("--inject-fault", "unknown fault '" + fault + "' (known: gradient_sign)");
  }
  const auto results = selftest::run_all();
  model::testing::set_gradient_sign_fault(false);
  int failures = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.module << '/' << r.invariant << '\n';
    if (!r.passed) {
      ++failures;
      err << "FAIL " << r.module << '/' << r.invariant << ": " << r.detail << '\n';
    }
  }
  out << results.size() - failures << '/' << results.size() << " checks passed\n";
  return failures == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive-sampling trust-region solver for stochastic derivative-free optimization"};
  app.footer(config::describe_keys() +
             "\nEnvironment: ASTRODF_OUT sets the default output directory.");
  app.require_subcommand(1);

  CommonFlags solve_flags, exp_flags, profile_flags;
  auto* solve = app.add_subcommand("solve", "tune and run the solver once; writes iterations.csv");
  add_common_flags(solve, solve_flags, false);

  std::string spec_path;
  auto* experiment = app.add_subcommand(
      "experiment", "macro-replications with post-replication; writes results/iterations/profile CSVs");
  experiment->add_option("spec", spec_path, "experiment spec file (same format as --config)");
  add_common_flags(experiment, exp_flags, true);

  std::string results_path;
  std::optional<double> alpha;
  auto* profile = app.add_subcommand("profile", "solvability profile from an existing results.csv");
  profile->add_option("--results", results_path, "results.csv to read")->required();
  profile->add_option("--alpha", alpha, "relative optimality gap (experiment.alpha)");
  profile->add_option("--config", profile_flags.config_path, "config file");
  profile->add_option("--out", profile_flags.out, "output directory");
  profile->add_option("--set", profile_flags.overrides, "override any key: --set dotted.key=value");

  std::string fault;
  auto* self = app.add_subcommand("selftest", "fast invariant suite");
  self->add_option("--inject-fault", fault, "test hook: gradient_sign");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_flags, out);
    if (experiment->parsed()) return cmd_experiment(exp_flags, spec_path, out, err);
    if (profile->parsed()) return cmd_profile(profile_flags, results_path, alpha, out, err);
    if (self->parsed()) return cmd_selftest(fault, out, err);
  } catch (const ConfigError& e) {
    err << "config error [" << e.key() << "]: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace astrodf::cli
