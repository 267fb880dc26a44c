#pragma once

#include <string>
#include <vector>

namespace moo::acceptance {

// Outcome of one end-to-end check. `details` carries the measured values and
// the pinned tolerances so a failure is diagnosable from the log alone.
struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string details;
};

// Stable list of criterion names, in report order.
const std::vector<std::string>& criterion_names();

// Runs a single criterion by name; throws std::invalid_argument for unknown
// names.
CriterionResult run_criterion(const std::string& name);

// Runs every criterion in order.
std::vector<CriterionResult> run_all();

// Entry point for the benchmark CLI's `oracle` subcommand: runs the named
// criteria ("all" expands to every one), prints one [PASS]/[FAIL] line per
// criterion, and returns 0 iff all pass.
int oracle_main(const std::vector<std::string>& names);

}  // namespace moo::acceptance
