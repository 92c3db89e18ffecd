#pragma once

#include <string>

namespace hmcf::harness {

struct CriterionResult {
  int criterion = 0;
  bool passed = false;
  std::string detail;
};

// Runs one acceptance criterion (1..10), writing its CSV artifacts under
// out_dir/crit<k>/ and printing a single "[PASS]"/"[FAIL]" line to stdout.
// All tolerances are pinned inside; `threads` only sets the default worker
// count (criterion 10 runs its rerun pairs at 1 and 8 threads regardless).
CriterionResult run_criterion(int k, const std::string& out_dir, int threads);

// All ten criteria in order; true when every one passes.
bool run_all_criteria(const std::string& out_dir, int threads);

}  // namespace hmcf::harness
