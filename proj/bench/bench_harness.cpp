// Times the serial reference against the OpenMP macro-replication driver on
// one experiment spec and checks that both produce the same results.
//
//   bench_harness [spec] [threads...]

#include <chrono>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <omp.h>

#include "astrodf/config.hpp"
#include "astrodf/harness.hpp"

using namespace astrodf;

namespace {

std::string results_bytes(const harness::ExperimentResult& r) {
  std::ostringstream out;
  harness::write_results_csv(out, r.trajectory_rows());
  harness::write_iterations_csv(out, r.iteration_rows());
  return out.str();
}

template <class F>
double seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path =
      argc > 1 ? argv[1] : std::string(ASTRODF_SOURCE_DIR) + "/configs/rosenbrock20.spec";
  std::vector<int> threads;
  for (int i = 2; i < argc; ++i) threads.push_back(std::stoi(argv[i]));
  if (threads.empty()) threads = {2, 4, omp_get_max_threads()};

  std::ifstream in(path);
  if (!in) {
    fmt::print(stderr, "cannot open {}\n", path);
    return 2;
  }
  const auto spec = config::experiment_spec(config::Config::parse(in));
  fmt::print("{}: {} variant(s) x {} macro-reps, budget {}\n", spec.experiment_id, spec.variants.size(),
             spec.macroreps, spec.budget);

  harness::ExperimentResult serial;
  const double t_serial = seconds([&] { serial = harness::run_experiment_serial(spec); });
  const std::string reference = results_bytes(serial);
  fmt::print("{:>10}  {:>9.3f} s\n", "serial", t_serial);

  bool identical = true;
  for (int t : threads) {
    harness::ExperimentResult parallel;
    const double tp = seconds([&] { parallel = harness::run_experiment_parallel(spec, t); });
    const bool same = results_bytes(parallel) == reference;
    identical = identical && same;
    fmt::print("{:>7} thr  {:>9.3f} s  speedup {:5.2f}  {}\n", t, tp, t_serial / tp,
               same ? "identical" : "DIFFERS");
  }
  return identical ? 0 : 1;
}
