#include "moo/runner.hpp"

#include "moo/balancers.hpp"
#include "moo/marigold.hpp"
#include "moo/metrics.hpp"
#include "moo/optimizers.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace moo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Batch pick_batch(const MooProblem& problem, RngState& rng, int batch_size) {
  if (problem.pool_size() == 0 || batch_size <= 0) return Batch::full();
  return sample_batch(problem, rng, batch_size);
}

// Uncounted diagnostic: full-data stationarity gap at theta.
double diagnostic_gap(const MooProblem& raw, const Vec& theta) {
  return pareto_stationarity_gap(raw.eval_gradients(theta, Batch::full()));
}

OptimizerState build_optimizer(const RunConfig& cfg) {
  if (cfg.opt_kind == OptimizerState::Kind::kSgd) return OptimizerState::sgd(cfg.alpha);
  return OptimizerState::adam(cfg.alpha, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
}

Vec initial_theta(const RunConfig& cfg, int d, RngState& rng) {
  Vec theta(d);
  for (int i = 0; i < d; ++i) theta[i] = cfg.theta0_scale * rng.next_gaussian();
  return theta;
}

bool gradient_based(BalancerKind kind) {
  return kind == BalancerKind::kMgda || kind == BalancerKind::kPcgrad ||
         kind == BalancerKind::kLinearized;
}

class StopWatch {
 public:
  explicit StopWatch(bool enabled) : enabled_(enabled), start_(Clock::now()) {}
  double elapsed_ms() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
  }

 private:
  using Clock = std::chrono::steady_clock;
  bool enabled_;
  Clock::time_point start_;
};

}  // namespace

std::unique_ptr<MooProblem> build_problem(const RunConfig& cfg) {
  switch (cfg.problem) {
    case ProblemType::kQuadratic: {
      QuadraticSpec spec =
          cfg.quad_kind == QuadraticKind::kIdentity
              ? random_identity_quadratics(cfg.m, cfg.d, cfg.gen_seed, cfg.center_scale)
              : random_spd_quadratics(cfg.m, cfg.d, cfg.gen_seed, cfg.center_scale, cfg.eig_min,
                                      cfg.eig_max);
      return make_quadratic_suite(std::move(spec));
    }
    case ProblemType::kMlp: {
      MlpSpec spec;
      spec.input_dim = cfg.input_dim;
      spec.shared_widths = cfg.shared_widths;
      spec.head_hidden_widths.assign(cfg.m, cfg.head_hidden);
      spec.data_seed = cfg.gen_seed;
      spec.pool_size = cfg.pool_size;
      spec.noise_scale = cfg.noise_scale;
      return make_mlp_problem(std::move(spec));
    }
    case ProblemType::kAux: {
      AuxProblemSpec spec;
      spec.main_tasks = random_identity_quadratics(cfg.n_main, cfg.d, cfg.gen_seed,
                                                   cfg.center_scale);
      if (cfg.aligned_aux) {
        spec.aux_center = spec.main_tasks.centers[cfg.target_index];
        spec.aux_curvature = spec.main_tasks.curvatures[cfg.target_index];
      } else {
        QuadraticSpec extra =
            random_identity_quadratics(1, cfg.d, cfg.gen_seed ^ 0x9E3779B97F4A7C15ULL,
                                       cfg.center_scale);
        spec.aux_center = extra.centers[0];
        spec.aux_curvature = extra.curvatures[0];
      }
      spec.target_index = cfg.target_index;
      return make_aux_problem(std::move(spec));
    }
  }
  throw std::logic_error("build_problem: unreachable");
}

namespace {

struct LoopContext {
  const RunConfig& cfg;
  const MooProblem& raw;
  CountedProblem& counted;
  RunRecord& record;
  const StopWatch& watch;
};

void log_row(LoopContext& ctx, long iter, const Vec& losses, const Vec& lambda, const Vec& rho,
             const Vec& theta, double decrement) {
  if (iter % ctx.cfg.log_stride != 0) return;
  RunRecordRow row;
  row.iter = iter;
  row.losses = losses;
  row.lambda = lambda;
  row.rho = rho;
  row.stat_gap = diagnostic_gap(ctx.raw, theta);
  row.decrement = decrement;
  row.weighted_gevals = ctx.counted.counters().weighted_gevals;
  row.pertask_gevals = ctx.counted.counters().pertask_gevals;
  row.elapsed_ms = ctx.watch.elapsed_ms();
  ctx.record.rows.push_back(std::move(row));
}

// Marigold training loop (worst-case-decrement objective).
Vec loop_marigold(LoopContext& ctx, Vec theta, OptimizerState& opt, RngState& rng) {
  const int m = ctx.counted.num_tasks();
  MarigoldState state = MarigoldState::init(m, ctx.cfg.perturb_mode);
  state.beta = ctx.cfg.beta;
  state.r = ctx.cfg.r;
  state.opt_u = OptimizerState::adam(ctx.cfg.upper_lr_u);
  state.opt_v = OptimizerState::adam(ctx.cfg.upper_lr_v);
  state.schedule = ctx.cfg.update_schedule;
  state.batch_policy = ctx.cfg.batch_policy;
  state.batch_size = ctx.cfg.batch_size;

  for (long k = 0; k < ctx.cfg.iterations; ++k) {
    // Domain violations (e.g. a loss collapsing to zero under the softmax
    // parameterization) abort the run like any other numeric failure.
    try {
      MarigoldStepResult res = marigold_step(state, theta, ctx.counted, opt, rng);
      if (!res.theta.allFinite() || !res.post_losses.allFinite())
        throw std::domain_error("non-finite values");
      theta = res.theta;
      log_row(ctx, k, res.post_losses, res.lambda.values(), res.rho.values(), theta,
              res.decrement);
    } catch (const std::domain_error&) {
      ctx.record.aborted = true;
      ctx.record.aborted_iter = k;
      break;
    }
  }
  return theta;
}

// Auxiliary-learning loop: marigold's generalized form with the main-task
// objective; omega is either trained or held at its initial value.
Vec loop_aux(LoopContext& ctx, Vec theta, OptimizerState& opt, RngState& rng) {
  const auto& aux_problem = dynamic_cast<const AuxProblem&>(ctx.raw);
  GeneralizedState state;
  state.objective.kind = UpperObjective::Kind::kMainTaskLoss;
  state.aux.omega = ctx.cfg.aux_omega0;
  state.aux.opt_omega = OptimizerState::adam(ctx.cfg.aux_lr);
  state.aux.r = ctx.cfg.aux_r;
  state.aux.batch_size = ctx.cfg.batch_size;
  const int target = aux_problem.target_index();
  Vec rho = Vec::Zero(ctx.counted.num_tasks());
  rho[target] = 1.0;

  for (long k = 0; k < ctx.cfg.iterations; ++k) {
    try {
      Vec base, post, weights;
      if (ctx.cfg.aux_learn_omega) {
        GeneralizedStepResult res = generalized_step(state, theta, ctx.counted, opt, rng);
        base = std::move(res.base_losses);
        post = std::move(res.post_losses);
        weights = std::move(res.weights);
        theta = std::move(res.theta);
      } else {
        Batch batch = pick_batch(ctx.counted, rng, ctx.cfg.batch_size);
        base = ctx.counted.eval_losses(theta, batch);
        weights = aux_problem.lower_level_weights(state.aux.omega);
        theta = apply_A_weighted(opt, weights, theta, ctx.counted, batch, StepMode::kCommit);
        post = ctx.counted.eval_losses(theta, batch);
      }
      if (!theta.allFinite() || !post.allFinite())
        throw std::domain_error("non-finite values");
      log_row(ctx, k, post, weights, rho, theta, post[target] - base[target]);
    } catch (const std::domain_error&) {
      ctx.record.aborted = true;
      ctx.record.aborted_iter = k;
      break;
    }
  }
  return theta;
}

// Baseline loop: one balancing decision per iteration from the per-task
// gradients and/or losses, then one optimizer step.
Vec loop_baseline(LoopContext& ctx, BalancerKind kind, Vec theta, OptimizerState& opt,
                  RngState& rng) {
  const int m = ctx.counted.num_tasks();
  const Vec uniform = Vec::Constant(m, 1.0 / m);
  for (long k = 0; k < ctx.cfg.iterations; ++k) {
    try {
      Batch batch = pick_batch(ctx.counted, rng, ctx.cfg.batch_size);
      Vec base = ctx.counted.eval_losses(theta, batch);
      if (!base.allFinite()) throw std::domain_error("non-finite values");
      BalancerOutput out;
      if (gradient_based(kind)) {
        Mat G = ctx.counted.eval_gradients(theta, batch);
        out = balance(kind, G, base, ctx.cfg.alpha, rng);
      } else {
        out = balance(kind, Mat(), base, ctx.cfg.alpha, rng);
      }
      Vec theta_next;
      if (out.direction) {
        theta_next = optimizer_step(opt, theta, *out.direction, StepMode::kCommit);
      } else {
        theta_next = apply_A(opt, *out.weights, theta, ctx.counted, batch, StepMode::kCommit);
      }
      Vec post = ctx.counted.eval_losses(theta_next, batch);
      if (!theta_next.allFinite() || !post.allFinite())
        throw std::domain_error("non-finite values");
      theta = std::move(theta_next);
      const Vec lambda = out.weights ? out.weights->values() : uniform;
      log_row(ctx, k, post, lambda, uniform, theta, (post - base).maxCoeff());
    } catch (const std::domain_error&) {
      ctx.record.aborted = true;
      ctx.record.aborted_iter = k;
      break;
    }
  }
  return theta;
}

}  // namespace

SingleRun run_single(const RunConfig& cfg, BalancerKind method, std::uint64_t seed,
                     const MooProblem& problem) {
  CountedProblem counted(problem);
  RngState rng(seed);
  OptimizerState opt = build_optimizer(cfg);
  Vec theta = initial_theta(cfg, problem.dim(), rng);

  SingleRun out;
  out.record.m = problem.num_tasks();
  StopWatch watch(cfg.timing);
  LoopContext ctx{cfg, problem, counted, out.record, watch};

  const bool aux_mode = cfg.problem == ProblemType::kAux && method == BalancerKind::kMarigold;
  if (aux_mode) {
    theta = loop_aux(ctx, std::move(theta), opt, rng);
  } else if (method == BalancerKind::kMarigold) {
    theta = loop_marigold(ctx, std::move(theta), opt, rng);
  } else {
    theta = loop_baseline(ctx, method, std::move(theta), opt, rng);
  }

  out.counters = counted.counters();
  if (out.record.aborted || !theta.allFinite()) {
    out.final_losses = Vec::Constant(problem.num_tasks(), kNaN);
    out.final_stat_gap = kNaN;
  } else {
    out.final_losses = problem.eval_losses(theta, Batch::full());
    out.final_stat_gap = diagnostic_gap(problem, theta);
  }
  return out;
}

std::string render_trajectory_csv(const RunRecord& record) {
  std::ostringstream os;
  os << "iter";
  for (int i = 1; i <= record.m; ++i) os << ",loss_" << i;
  for (int i = 1; i <= record.m; ++i) os << ",lambda_" << i;
  for (int i = 1; i <= record.m; ++i) os << ",rho_" << i;
  os << ",stat_gap,decrement,weighted_gevals,pertask_gevals,elapsed_ms\n";
  for (const RunRecordRow& row : record.rows) {
    os << row.iter;
    for (int i = 0; i < record.m; ++i) os << ',' << fmt17(row.losses[i]);
    for (int i = 0; i < record.m; ++i) os << ',' << fmt17(row.lambda[i]);
    for (int i = 0; i < record.m; ++i) os << ',' << fmt17(row.rho[i]);
    os << ',' << fmt17(row.stat_gap) << ',' << fmt17(row.decrement) << ','
       << row.weighted_gevals << ',' << row.pertask_gevals << ',' << fmt17(row.elapsed_ms)
       << '\n';
  }
  if (record.aborted)
    os << "# aborted: non-finite values at iter " << record.aborted_iter << "\n";
  return os.str();
}

std::string render_summary_csv(const SummaryTable& table) {
  std::ostringstream os;
  os << "method";
  for (const std::string& name : table.metric_names) os << ",final_" << name;
  os << ",delta_pct,mean_rank,weighted_gevals,pertask_gevals\n";
  for (const MethodSummary& ms : table.methods) {
    os << ms.method;
    for (int i = 0; i < ms.final_losses.size(); ++i) os << ',' << fmt17(ms.final_losses[i]);
    os << ',' << fmt17(ms.final_stat_gap) << ',' << fmt17(ms.delta_pct) << ','
       << fmt17(ms.mean_rank) << ',' << ms.weighted_gevals << ',' << ms.pertask_gevals << '\n';
  }
  return os.str();
}

std::string resolve_out_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("MOOBENCH_OUT"); env && *env) return env;
  return "./out";
}

ExperimentResult run_experiment(const RunConfig& cfg) {
  std::unique_ptr<MooProblem> problem = build_problem(cfg);
  const std::string out_dir = resolve_out_dir(cfg);
  std::filesystem::create_directories(out_dir);

  ExperimentResult result;
  const int m = problem->num_tasks();
  const int n_methods = static_cast<int>(cfg.balancers.size());
  const int n_seeds = static_cast<int>(cfg.seeds.size());

  // finals(method, seed) -> [losses..., stat gap]; the aggregate columns
  // (delta, mean rank) use the m task losses only, the gap being a
  // diagnostic whose near-zero baselines would swamp relative degradation.
  std::vector<std::vector<Vec>> finals(n_methods, std::vector<Vec>(n_seeds));
  std::vector<MethodSummary> summaries(n_methods);

  for (int mi = 0; mi < n_methods; ++mi) {
    const BalancerKind kind = cfg.balancers[mi];
    MethodSummary& ms = summaries[mi];
    ms.method = balancer_name(kind);
    ms.final_losses = Vec::Zero(m);
    for (int si = 0; si < n_seeds; ++si) {
      SingleRun run = run_single(cfg, kind, cfg.seeds[si], *problem);
      if (run.record.aborted) result.numeric_failure = true;
      Vec metrics(m + 1);
      metrics.head(m) = run.final_losses;
      metrics[m] = run.final_stat_gap;
      finals[mi][si] = std::move(metrics);
      ms.weighted_gevals += run.counters.weighted_gevals;
      ms.pertask_gevals += run.counters.pertask_gevals;

      std::filesystem::path p = std::filesystem::path(out_dir) /
                                (ms.method + "_seed" + std::to_string(cfg.seeds[si]) + ".csv");
      std::ofstream f(p, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + p.string());
      f << render_trajectory_csv(run.record);
      result.csv_paths.push_back(p.string());
    }
  }

  // Seed-averaged final metrics.
  for (int mi = 0; mi < n_methods; ++mi) {
    Vec mean = Vec::Zero(m + 1);
    for (int si = 0; si < n_seeds; ++si) mean += finals[mi][si];
    mean /= static_cast<double>(n_seeds);
    summaries[mi].final_losses = mean.head(m);
    summaries[mi].final_stat_gap = mean[m];
  }

  std::vector<MetricSpec> specs(m);
  for (int j = 0; j < m; ++j) specs[j] = {"loss_" + std::to_string(j + 1), Direction::kLowerBetter};

  // Delta % against the baseline method's seed-averaged final losses.
  std::string base_name = cfg.delta_baseline.empty() ? summaries[0].method : cfg.delta_baseline;
  int base_idx = 0;
  for (int mi = 0; mi < n_methods; ++mi)
    if (summaries[mi].method == base_name) base_idx = mi;
  const Vec base_losses = summaries[base_idx].final_losses;
  const bool base_ok = base_losses.allFinite() && (base_losses.array() != 0.0).all();
  for (int mi = 0; mi < n_methods; ++mi) {
    const Vec& mm = summaries[mi].final_losses;
    summaries[mi].delta_pct = base_ok && mm.allFinite() ? delta_k(mm, base_losses, specs) : kNaN;
  }

  // Mean rank over the task losses: rank per seed, then average over seeds.
  if (n_methods >= 2 && !result.numeric_failure) {
    Vec mr = Vec::Zero(n_methods);
    for (int si = 0; si < n_seeds; ++si) {
      Mat table(n_methods, m);
      for (int mi = 0; mi < n_methods; ++mi) table.row(mi) = finals[mi][si].head(m).transpose();
      mr += mean_rank(table, specs);
    }
    mr /= static_cast<double>(n_seeds);
    for (int mi = 0; mi < n_methods; ++mi) summaries[mi].mean_rank = mr[mi];
  } else if (result.numeric_failure) {
    for (MethodSummary& ms : summaries) ms.mean_rank = kNaN;
  }

  result.summary.metric_names.reserve(m + 1);
  for (const MetricSpec& s : specs) result.summary.metric_names.push_back(s.name);
  result.summary.metric_names.push_back("stat_gap");
  result.summary.methods = std::move(summaries);

  std::filesystem::path sp = std::filesystem::path(out_dir) / "summary.csv";
  std::ofstream sf(sp, std::ios::binary);
  if (!sf) throw std::runtime_error("cannot write " + sp.string());
  sf << render_summary_csv(result.summary);
  result.csv_paths.push_back(sp.string());
  return result;
}

int cli_main(int argc, const char* const* argv, OracleHandler oracle_handler) {
  CLI::App app{"multi-objective optimization benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool have_seed = false;

  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
  run_cmd->add_option("--config", config_path, "configuration file")->required();
  run_cmd->add_option("--seed", seed_override, "replace the config's seed list with one seed")
      ->each([&](const std::string&) { have_seed = true; });
  run_cmd->add_option("--out", out_override, "output directory override");

  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand("validate", "parse and validate a config file");
  validate_cmd->add_option("--config", validate_path, "configuration file")->required();

  std::vector<std::string> oracle_names;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "run named acceptance oracles");
  oracle_cmd->add_option("names", oracle_names, "oracle names (or 'all')")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run_cmd->parsed()) {
      RunConfig cfg = parse_config(config_path);
      if (have_seed) cfg.seeds = {seed_override};
      if (!out_override.empty()) cfg.out_dir = out_override;
      validate_config(cfg);
      ExperimentResult result = run_experiment(cfg);
      for (const std::string& p : result.csv_paths) std::printf("wrote %s\n", p.c_str());
      if (result.numeric_failure) {
        std::fprintf(stderr, "numeric failure: at least one run aborted on non-finite values\n");
        return 2;
      }
      return 0;
    }
    if (validate_cmd->parsed()) {
      parse_config(validate_path);
      std::printf("ok: %s\n", validate_path.c_str());
      return 0;
    }
    if (oracle_cmd->parsed()) {
      if (!oracle_handler) {
        std::fprintf(stderr, "oracle subcommand is not available in this binary\n");
        return 1;
      }
      return oracle_handler(oracle_names);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

}  // namespace moo
