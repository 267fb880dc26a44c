#pragma once

#include "moo/config.hpp"
#include "moo/metrics.hpp"
#include "moo/problems.hpp"

#include <memory>
#include <string>
#include <vector>

namespace moo {

// Per-method row of the experiment summary. Final metrics are seed-averaged;
// evaluation counters are totals over seeds.
struct MethodSummary {
  std::string method;
  Vec final_losses;       // length m
  double final_stat_gap = 0.0;
  double delta_pct = 0.0;  // vs the baseline method's seed-averaged metrics
  double mean_rank = 1.0;  // ranked per seed, then averaged
  long weighted_gevals = 0;
  long pertask_gevals = 0;
};

struct SummaryTable {
  std::vector<std::string> metric_names;  // loss_1..loss_m, stat_gap (all lower-better)
  std::vector<MethodSummary> methods;
};

struct ExperimentResult {
  SummaryTable summary;
  std::vector<std::string> csv_paths;  // trajectory files followed by summary.csv
  bool numeric_failure = false;        // some run aborted on non-finite values
};

// Problem instance from the configuration (uses gen_seed only, so every seed
// of a run sees the same data).
std::unique_ptr<MooProblem> build_problem(const RunConfig& config);

// One (method, seed) trajectory plus its end-of-run diagnostics; the final
// metrics are evaluated on the full data regardless of the logging stride.
struct SingleRun {
  RunRecord record;
  Vec final_losses;            // NaN-filled if the run aborted
  double final_stat_gap = 0.0; // NaN if the run aborted
  EvalCounters counters;
};

// The RNG stream is derived solely from the seed, so seed-list order cannot
// affect any per-seed output.
SingleRun run_single(const RunConfig& config, BalancerKind method, std::uint64_t seed,
                     const MooProblem& problem);

// Full experiment: every (method, seed) trajectory CSV plus summary.csv in
// the resolved output directory. Identical configs give byte-identical files.
ExperimentResult run_experiment(const RunConfig& config);

// CSV rendering (exposed for tests; 17 significant digits).
std::string render_trajectory_csv(const RunRecord& record);
std::string render_summary_csv(const SummaryTable& table);

// Output directory resolution: config value, else $MOOBENCH_OUT, else ./out.
std::string resolve_out_dir(const RunConfig& config);

// Handler for the `oracle <name>` subcommand, installed by the binary that
// links the acceptance library; receives the requested names, returns an
// exit code.
using OracleHandler = int (*)(const std::vector<std::string>& names);

// `moobench` entry point: run / validate / oracle subcommands.
// Exit codes: 0 ok, 1 configuration or usage error, 2 numeric failure.
int cli_main(int argc, const char* const* argv, OracleHandler oracle_handler = nullptr);

}  // namespace moo
