#pragma once

// Fast invariant suite behind `astrodf selftest`.

#include <string>
#include <vector>

namespace astrodf::selftest {

struct CheckResult {
  std::string module;
  std::string invariant;
  bool passed = false;
  std::string detail;
};

/// Runs every check; never throws (exceptions become failed checks).
std::vector<CheckResult> run_all();

}  // namespace astrodf::selftest
