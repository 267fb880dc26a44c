#include "moo/acceptance.hpp"

#include "moo/balancers.hpp"
#include "moo/config.hpp"
#include "moo/core_math.hpp"
#include "moo/marigold.hpp"
#include "moo/metrics.hpp"
#include "moo/optimizers.hpp"
#include "moo/problems.hpp"
#include "moo/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace moo::acceptance {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Component-wise running mean and standard error over vector samples.
class VecStats {
 public:
  explicit VecStats(int n) : sum_(Vec::Zero(n)), sumsq_(Vec::Zero(n)) {}

  void add(const Vec& x) {
    sum_ += x;
    sumsq_ += x.cwiseProduct(x);
    ++n_;
  }

  Vec mean() const { return sum_ / static_cast<double>(n_); }

  // Standard error of the mean, per component.
  Vec se() const {
    const double n = static_cast<double>(n_);
    Vec m = mean();
    Vec var = (sumsq_ - n * m.cwiseProduct(m)) / (n - 1.0);
    return (var.cwiseMax(0.0) / n).cwiseSqrt();
  }

 private:
  long n_ = 0;
  Vec sum_;
  Vec sumsq_;
};

bool bits_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

std::string read_file_bytes(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// --- 1. Smoothing / estimator bias bounds ---------------------------------
//
// On a d=8 quadratic with known smoothness constant ell, for
// r in {1e-1, 1e-2, 1e-3}:
//   (a) |MC mean of f(x+r u) - f(x)| <= ell r^2 / 2 + 3 SE   (2e5 ball samples)
//   (b) ||MC mean of the single-point estimate - grad f|| <= ell r + 3 SE
//       (2e5 sphere samples)
CriterionResult crit_zo_bias_bounds() {
  const int d = 8;
  Vec eigs(d);
  for (int i = 0; i < d; ++i) eigs[i] = 0.5 + 1.5 * i / (d - 1);
  const double ell = 2.0;  // largest curvature eigenvalue

  RngState rng(9001);
  Vec c(d), x0(d);
  for (int i = 0; i < d; ++i) c[i] = rng.next_gaussian();
  for (int i = 0; i < d; ++i) x0[i] = c[i] + 0.5 * rng.next_gaussian();

  ScalarFn f = [&](const Vec& x) {
    Vec z = x - c;
    return 0.5 * z.dot(eigs.cwiseProduct(z));
  };
  const double f0 = f(x0);
  const Vec grad0 = eigs.cwiseProduct(x0 - c);

  const long kSamples = 200000;
  bool pass = true;
  std::ostringstream det;
  for (double r : {1e-1, 1e-2, 1e-3}) {
    VecStats value_stats(1);
    for (long s = 0; s < kSamples; ++s) {
      Vec u = sample_unit_ball(rng, d);
      Vec dev(1);
      dev[0] = f(x0 + r * u) - f0;
      value_stats.add(dev);
    }
    const double value_dev = std::abs(value_stats.mean()[0]);
    const double value_allow = ell * r * r / 2.0 + 3.0 * value_stats.se()[0];

    VecStats grad_stats(d);
    for (long s = 0; s < kSamples; ++s) {
      Vec v = sample_unit_sphere(rng, d);
      grad_stats.add(zo_gradient_estimate(f, x0, r, v) - grad0);
    }
    const double grad_dev = grad_stats.mean().norm();
    const double grad_allow = ell * r + 3.0 * grad_stats.se().norm();

    pass = pass && value_dev <= value_allow && grad_dev <= grad_allow;
    det << "r=" << fmt(r) << " value " << fmt(value_dev) << "<=" << fmt(value_allow)
        << ", grad " << fmt(grad_dev) << "<=" << fmt(grad_allow) << "; ";
  }
  return {"zo-bias-bounds", pass, det.str()};
}

// --- 2. Min-norm solver vs dense simplex grid ------------------------------
//
// 50 random instances each for m in {2, 3}: solver gap matches a
// 0.001-resolution grid search within 1e-3, and the descent property
// <g_i, d*> >= ||d*||^2 - 1e-8 holds on every instance.
CriterionResult crit_minnorm_oracle() {
  RngState rng(20250825);
  const int d = 5;
  double max_gap_diff = 0.0;
  double min_slack = kInf;
  for (int m : {2, 3}) {
    for (int inst = 0; inst < 50; ++inst) {
      Mat G(m, d);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j) G(i, j) = rng.next_gaussian();

      MinNormResult res = min_norm_solve(G);
      Mat M = G * G.transpose();

      double best = kInf;
      if (m == 2) {
        for (int i = 0; i <= 1000; ++i) {
          const double a = i / 1000.0, b = 1.0 - a;
          best = std::min(best, a * a * M(0, 0) + 2 * a * b * M(0, 1) + b * b * M(1, 1));
        }
      } else {
        for (int i = 0; i <= 1000; ++i) {
          const double a = i / 1000.0;
          for (int j = 0; j <= 1000 - i; ++j) {
            const double b = j / 1000.0, cc = 1.0 - a - b;
            const double q = a * a * M(0, 0) + b * b * M(1, 1) + cc * cc * M(2, 2) +
                             2 * (a * b * M(0, 1) + a * cc * M(0, 2) + b * cc * M(1, 2));
            best = std::min(best, q);
          }
        }
      }
      const double grid_gap = std::sqrt(std::max(best, 0.0));
      max_gap_diff = std::max(max_gap_diff, std::abs(res.gap - grid_gap));

      const Vec dir = G.transpose() * res.weights.values();
      const double dn2 = dir.squaredNorm();
      for (int i = 0; i < m; ++i)
        min_slack = std::min(min_slack, G.row(i).dot(dir) - dn2);
    }
  }
  const bool pass = max_gap_diff <= 1e-3 && min_slack >= -1e-8;
  std::ostringstream det;
  det << "max |solver gap - grid gap| = " << fmt(max_gap_diff)
      << " (tol 1e-3), min descent slack = " << fmt(min_slack) << " (floor -1e-8)";
  return {"minnorm-oracle", pass, det.str()};
}

// --- 3. Hypergradient estimator fidelity -----------------------------------
//
// 3-task quadratic, one SGD step as the update map (alpha = 0.05).
// (a) The mean of 1e5 single-point estimates matches the central-difference
//     surrogate gradient within 3 MC standard errors plus a pinned O(r)
//     allowance, for r in {1e-1, 1e-2}.
// (b) The smoothing bias, isolated with antithetic pairs sharing one
//     direction stream across radii (anchor r = 1e-3), shrinks at least
//     5x when r drops from 1e-1 to 1e-2.
CriterionResult crit_hypergrad_fidelity() {
  const int m = 3, d = 4;
  auto prob = make_quadratic_suite(random_identity_quadratics(m, d, 778, 1.5));
  RngState gen(777);
  Vec theta(d);
  for (int i = 0; i < d; ++i) theta[i] = gen.next_gaussian();
  Vec u(m), v(m);
  u << 0.3, -0.2, 0.1;
  v << -0.1, 0.4, 0.2;
  const double beta = 4.0;
  OptimizerState sgd = OptimizerState::sgd(0.05);
  const Batch full = Batch::full();

  const Vec exact = exact_surrogate_hypergrad_fd(u, v, beta, theta, *prob, full, sgd, 1e-5);

  auto make_state = [&](double r) {
    MarigoldState st = MarigoldState::init(m);
    st.u = u;
    st.v = v;
    st.beta = beta;
    st.r = r;
    return st;
  };
  auto stacked = [&](const HypergradEstimate& e) {
    Vec s(2 * m);
    s.head(m) = e.g_u;
    s.tail(m) = e.g_v;
    return s;
  };

  const long kSamples = 100000;
  const double kBiasCoeff = 2.0;  // pinned O(r) allowance coefficient
  bool pass = true;
  std::ostringstream det;

  for (double r : {1e-1, 1e-2}) {
    MarigoldState st = make_state(r);
    RngState rng(31337);
    VecStats stats(2 * m);
    for (long s = 0; s < kSamples; ++s) {
      Vec e = sample_unit_sphere(rng, m);
      stats.add(stacked(hypergrad_with_direction(st, theta, *prob, full, sgd, e)) - exact);
    }
    const double dev = stats.mean().norm();
    const double allow = 3.0 * stats.se().norm() + kBiasCoeff * r;
    pass = pass && dev <= allow;
    det << "r=" << fmt(r) << " |mean-exact|=" << fmt(dev) << "<=" << fmt(allow) << "; ";
  }

  // Antithetic means over a shared direction stream.
  auto antithetic_mean = [&](double r) {
    MarigoldState st = make_state(r);
    RngState rng(555);
    VecStats stats(2 * m);
    for (long s = 0; s < kSamples; ++s) {
      Vec e = sample_unit_sphere(rng, m);
      Vec a = stacked(hypergrad_with_direction(st, theta, *prob, full, sgd, e));
      Vec b = stacked(hypergrad_with_direction(st, theta, *prob, full, sgd, Vec(-e)));
      stats.add(0.5 * (a + b));
    }
    return stats.mean();
  };
  const Vec anchor = antithetic_mean(1e-3);
  const double bias_mid = (antithetic_mean(1e-2) - anchor).norm();
  const double bias_big = (antithetic_mean(1e-1) - anchor).norm();
  const bool shrink = bias_big >= 5.0 * bias_mid && bias_big >= 1e-7;
  pass = pass && shrink;
  det << "bias(1e-1)=" << fmt(bias_big) << " vs bias(1e-2)=" << fmt(bias_mid)
      << " (need >= 5x shrink)";
  return {"hypergrad-fidelity", pass, det.str()};
}

// --- 4. Linear-program identity: grid max of the surrogate ------------------
//
// max over a 0.01 rho-grid of surrogate_value equals worst_case_decrement
// within 1e-12 on 20 random states (the maximum of a linear functional over
// the simplex sits at a vertex, and probing is side-effect free).
CriterionResult crit_decrement_grid_identity() {
  RngState rng(4242);
  const int m = 3, d = 4;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    auto prob = make_quadratic_suite(random_identity_quadratics(m, d, 5000 + t, 1.5));
    Vec theta(d);
    for (int i = 0; i < d; ++i) theta[i] = rng.next_gaussian();
    Vec z(m);
    for (int i = 0; i < m; ++i) z[i] = rng.next_gaussian();
    const SimplexWeights lambda = softmax(z);

    OptimizerState opt =
        (t % 2 == 0) ? OptimizerState::sgd(0.05) : OptimizerState::adam(1e-3);
    // Warm the optimizer so probes run against non-trivial state.
    Vec warm = theta;
    for (int w = 0; w < 3; ++w)
      warm = apply_A(opt, SimplexWeights::uniform(m), warm, *prob, Batch::full(),
                     StepMode::kCommit);

    const double wcd = worst_case_decrement(lambda, theta, *prob, Batch::full(), opt);
    double grid_max = -kInf;
    for (int i = 0; i <= 100; ++i) {
      for (int j = 0; j <= 100 - i; ++j) {
        Vec rho(3);
        rho << i / 100.0, j / 100.0, (100 - i - j) / 100.0;
        grid_max = std::max(grid_max, surrogate_value(lambda, SimplexWeights(rho), theta,
                                                      *prob, Batch::full(), opt));
      }
    }
    worst = std::max(worst, std::abs(grid_max - wcd));
  }
  const bool pass = worst <= 1e-12;
  return {"decrement-grid-identity", pass,
          "max |grid max - worst_case_decrement| = " + fmt(worst) + " (tol 1e-12)"};
}

// --- 5. Stationarity convergence on the conflicting pair --------------------
//
// Two identity quadratics with opposite centers; the full method must reach
// stationarity gap < 1e-3 within 5000 iterations for 3 seeds. Uniform loss
// weighting (LS) runs alongside for comparison.
CriterionResult crit_pareto_convergence() {
  QuadraticSpec spec;
  Vec c1(2), c2(2);
  c1 << 1.0, 0.0;
  c2 << -1.0, 0.0;
  spec.centers = {c1, c2};
  spec.curvatures = {Mat::Identity(2, 2), Mat::Identity(2, 2)};
  auto prob = make_quadratic_suite(std::move(spec));

  auto gap_at = [&](const Vec& theta) {
    return pareto_stationarity_gap(prob->eval_gradients(theta, Batch::full()));
  };

  bool pass = true;
  std::ostringstream det;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    RngState rng(seed);
    Vec theta(2);
    for (int i = 0; i < 2; ++i) theta[i] = rng.next_gaussian();
    const Vec theta0 = theta;

    MarigoldState st = MarigoldState::init(2);
    OptimizerState opt = OptimizerState::sgd(0.1);
    long hit = -1;
    for (long k = 0; k < 5000; ++k) {
      theta = marigold_step(st, theta, *prob, opt, rng).theta;
      if (gap_at(theta) < 1e-3) {
        hit = k + 1;
        break;
      }
    }

    Vec theta_ls = theta0;
    OptimizerState opt_ls = OptimizerState::sgd(0.1);
    long hit_ls = -1;
    for (long k = 0; k < 5000; ++k) {
      theta_ls = apply_A(opt_ls, SimplexWeights::uniform(2), theta_ls, *prob, Batch::full(),
                         StepMode::kCommit);
      if (gap_at(theta_ls) < 1e-3) {
        hit_ls = k + 1;
        break;
      }
    }
    pass = pass && hit > 0;
    det << "seed " << seed << ": gap<1e-3 at iter " << hit << " (ls: " << hit_ls << "); ";
  }
  return {"pareto-convergence", pass, det.str()};
}

// --- 6. Per-iteration evaluation counters -----------------------------------
//
// Independent of m in {2, 8, 64}: the full method charges exactly 2
// weighted-gradient and 3 loss-vector evaluations per iteration (and no
// per-task gradients); MGDA / PCGrad / linearized charge exactly m per-task
// gradient evaluations per iteration (and no weighted ones).
CriterionResult crit_complexity_counters() {
  const long iters = 5;
  bool pass = true;
  std::ostringstream det;
  for (int m : {2, 8, 64}) {
    RunConfig cfg;
    cfg.problem = ProblemType::kQuadratic;
    cfg.quad_kind = QuadraticKind::kIdentity;
    cfg.m = m;
    cfg.d = 8;
    cfg.gen_seed = 321;
    cfg.opt_kind = OptimizerState::Kind::kSgd;
    cfg.alpha = 0.05;
    cfg.iterations = iters;
    cfg.log_stride = iters;  // keep logging sparse; counters are totals anyway
    auto prob = build_problem(cfg);

    SingleRun mg = run_single(cfg, BalancerKind::kMarigold, 7, *prob);
    const bool mg_ok = mg.counters.weighted_gevals == 2 * iters &&
                       mg.counters.loss_evals == 3 * iters &&
                       mg.counters.pertask_gevals == 0;
    pass = pass && mg_ok;
    det << "m=" << m << " marigold w/l/p=" << mg.counters.weighted_gevals << "/"
        << mg.counters.loss_evals << "/" << mg.counters.pertask_gevals;

    for (BalancerKind kind :
         {BalancerKind::kMgda, BalancerKind::kPcgrad, BalancerKind::kLinearized}) {
      SingleRun run = run_single(cfg, kind, 7, *prob);
      const bool ok = run.counters.pertask_gevals == m * iters &&
                      run.counters.weighted_gevals == 0;
      pass = pass && ok;
    }
    det << ", baselines pertask=m per iter; ";
  }
  return {"complexity-counters", pass, det.str()};
}

// --- 7. Signed relative-degradation table -----------------------------------
//
// Four-metric fixture (two higher-better, two lower-better); delta_k must
// reproduce the published aggregate values within +/-0.2 (the inputs are
// rounded to the table's precision).
CriterionResult crit_delta_table() {
  Vec base(4), mgda(4), pcgrad(4), cagrad(4);
  base << 74.01, 93.16, 0.0125, 27.77;
  mgda << 68.84, 91.54, 0.0309, 33.50;
  pcgrad << 75.13, 93.48, 0.0154, 42.07;
  cagrad << 75.16, 93.48, 0.0141, 37.60;
  const std::vector<MetricSpec> specs = {{"m1", Direction::kHigherBetter},
                                         {"m2", Direction::kHigherBetter},
                                         {"m3", Direction::kLowerBetter},
                                         {"m4", Direction::kLowerBetter}};
  struct Row {
    const char* name;
    const Vec* metrics;
    double expected;
  };
  const Row rows[] = {{"mgda", &mgda, 44.14}, {"pcgrad", &pcgrad, 18.29},
                      {"cagrad", &cagrad, 11.64}};
  bool pass = true;
  std::ostringstream det;
  for (const Row& row : rows) {
    const double got = delta_k(*row.metrics, base, specs);
    pass = pass && std::abs(got - row.expected) <= 0.2;
    det << row.name << " " << fmt(got) << " (expect " << row.expected << "+/-0.2); ";
  }
  return {"delta-table", pass, det.str()};
}

// --- 8. Generalized objective recovers the decrement method -----------------
//
// With the worst-case-decrement objective, generalized_step must be
// bit-identical to marigold_step over 1000 iterations sharing an RNG stream,
// on a batched MLP problem (so the batch draws exercise the stream too).
CriterionResult crit_generalized_recovery() {
  MlpSpec spec;
  spec.input_dim = 4;
  spec.shared_widths = {6};
  spec.head_hidden_widths = {{}, {}, {}};
  spec.data_seed = 99;
  spec.pool_size = 32;
  spec.noise_scale = 0.05;
  auto prob = make_mlp_problem(std::move(spec));

  RngState init_rng(2024);
  Vec theta0(prob->dim());
  for (int i = 0; i < theta0.size(); ++i) theta0[i] = 0.5 * init_rng.next_gaussian();

  auto setup = [] {
    MarigoldState st = MarigoldState::init(3);
    st.batch_size = 8;
    st.batch_policy = BatchPolicy::kResample;
    return st;
  };
  MarigoldState sa = setup();
  GeneralizedState gs;
  gs.objective.kind = UpperObjective::Kind::kWorstCaseDecrement;
  gs.marigold = setup();

  OptimizerState oa = OptimizerState::adam(1e-3);
  OptimizerState ob = OptimizerState::adam(1e-3);
  RngState ra(31), rb(31);
  Vec ta = theta0, tb = theta0;

  long diverged_at = -1;
  for (long k = 0; k < 1000; ++k) {
    MarigoldStepResult res_a = marigold_step(sa, ta, *prob, oa, ra);
    GeneralizedStepResult res_b = generalized_step(gs, tb, *prob, ob, rb);
    ta = res_a.theta;
    tb = res_b.theta;
    const bool same = bits_equal(ta, tb) &&
                      bits_equal(res_a.lambda.values(), res_b.weights) &&
                      std::memcmp(&res_a.decrement, &res_b.upper_value, sizeof(double)) == 0;
    if (!same) {
      diverged_at = k;
      break;
    }
  }
  const bool pass = diverged_at < 0;
  std::ostringstream det;
  if (pass)
    det << "1000 iterations bit-identical (theta, weights, upper value)";
  else
    det << "diverged at iteration " << diverged_at;
  return {"generalized-recovery", pass, det.str()};
}

// --- 9. Auxiliary-task weighting helps the main task -------------------------
//
// Aligned auxiliary construction: for 3 seeds, the learned-omega run's final
// main-task loss must not exceed the fixed omega = 0 baseline's.
CriterionResult crit_aux_benefit() {
  RunConfig cfg;
  cfg.problem = ProblemType::kAux;
  cfg.n_main = 3;
  cfg.d = 5;
  cfg.gen_seed = 606;
  cfg.center_scale = 1.5;
  cfg.aligned_aux = true;
  cfg.target_index = 0;
  cfg.opt_kind = OptimizerState::Kind::kSgd;
  cfg.alpha = 0.05;
  cfg.iterations = 4000;
  cfg.log_stride = 4000;
  cfg.aux_r = 1.0;  // the one-step probe's omega-sensitivity is ~2*alpha*r
  cfg.aux_lr = 1e-2;
  cfg.aux_omega0 = 0.0;
  auto prob = build_problem(cfg);

  bool pass = true;
  std::ostringstream det;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    cfg.aux_learn_omega = true;
    const double learned =
        run_single(cfg, BalancerKind::kMarigold, seed, *prob).final_losses[cfg.target_index];
    cfg.aux_learn_omega = false;
    const double fixed =
        run_single(cfg, BalancerKind::kMarigold, seed, *prob).final_losses[cfg.target_index];
    pass = pass && std::isfinite(learned) && std::isfinite(fixed) && learned <= fixed;
    det << "seed " << seed << ": learned " << fmt(learned) << " vs fixed " << fmt(fixed)
        << "; ";
  }
  return {"aux-benefit", pass, det.str()};
}

// --- 10. Byte-level determinism ----------------------------------------------
//
// The same config run twice yields byte-identical CSVs, and shuffling the
// seed list leaves every per-seed trajectory file unchanged.
CriterionResult crit_determinism() {
  const std::string cfg_text = R"(
[problem]
type = mlp
m = 2
input_dim = 3
shared_widths = 4
pool_size = 32
noise_scale = 0.05
gen_seed = 13

[optimizer]
type = adam
alpha = 1e-3

[run]
balancer = marigold, mgda, ls
iterations = 40
batch_size = 8
seeds = 1, 2, 3
log_stride = 1
)";
  RunConfig cfg = parse_config_text(cfg_text, "<acceptance>");

  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "moo-acceptance-determinism";
  fs::remove_all(base);

  auto run_into = [&](RunConfig c, const char* name) {
    c.out_dir = (base / name).string();
    return run_experiment(c);
  };
  const ExperimentResult res_a = run_into(cfg, "a");
  const ExperimentResult res_b = run_into(cfg, "b");

  bool pass = !res_a.numeric_failure && !res_b.numeric_failure;
  std::string first_mismatch;
  for (const std::string& pa : res_a.csv_paths) {
    const fs::path name = fs::path(pa).filename();
    const fs::path pb = base / "b" / name;
    if (read_file_bytes(pa) != read_file_bytes(pb)) {
      pass = false;
      if (first_mismatch.empty()) first_mismatch = "rerun diff " + name.string();
    }
  }

  RunConfig shuffled = cfg;
  shuffled.seeds = {3, 1, 2};
  const ExperimentResult res_c = run_into(shuffled, "c");
  pass = pass && !res_c.numeric_failure;
  for (const std::string& pa : res_a.csv_paths) {
    const fs::path name = fs::path(pa).filename();
    if (name == "summary.csv") continue;  // seed averaging order may differ
    const fs::path pc = base / "c" / name;
    if (read_file_bytes(pa) != read_file_bytes(pc)) {
      pass = false;
      if (first_mismatch.empty()) first_mismatch = "shuffle diff " + name.string();
    }
  }
  fs::remove_all(base);

  std::ostringstream det;
  if (pass)
    det << "rerun and seed-shuffle byte-identical over " << res_a.csv_paths.size()
        << " files";
  else
    det << "mismatch: " << first_mismatch;
  return {"determinism", pass, det.str()};
}

using CriterionFn = CriterionResult (*)();

struct Entry {
  const char* name;
  CriterionFn fn;
};

constexpr Entry kEntries[] = {
    {"zo-bias-bounds", &crit_zo_bias_bounds},
    {"minnorm-oracle", &crit_minnorm_oracle},
    {"hypergrad-fidelity", &crit_hypergrad_fidelity},
    {"decrement-grid-identity", &crit_decrement_grid_identity},
    {"pareto-convergence", &crit_pareto_convergence},
    {"complexity-counters", &crit_complexity_counters},
    {"delta-table", &crit_delta_table},
    {"generalized-recovery", &crit_generalized_recovery},
    {"aux-benefit", &crit_aux_benefit},
    {"determinism", &crit_determinism},
};

}  // namespace

const std::vector<std::string>& criterion_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Entry& e : kEntries) out.emplace_back(e.name);
    return out;
  }();
  return names;
}

CriterionResult run_criterion(const std::string& name) {
  for (const Entry& e : kEntries) {
    if (name == e.name) {
      try {
        return e.fn();
      } catch (const std::exception& ex) {
        return {name, false, std::string("exception: ") + ex.what()};
      }
    }
  }
  throw std::invalid_argument("unknown criterion: " + name);
}

std::vector<CriterionResult> run_all() {
  std::vector<CriterionResult> out;
  for (const Entry& e : kEntries) out.push_back(run_criterion(e.name));
  return out;
}

int oracle_main(const std::vector<std::string>& names) {
  std::vector<std::string> expanded;
  for (const std::string& n : names) {
    if (n == "all") {
      for (const Entry& e : kEntries) expanded.emplace_back(e.name);
    } else {
      expanded.push_back(n);
    }
  }
  bool all_pass = true;
  for (const std::string& n : expanded) {
    CriterionResult res;
    try {
      res = run_criterion(n);
    } catch (const std::invalid_argument& ex) {
      std::fprintf(stderr, "%s\n", ex.what());
      return 1;
    }
    std::printf("[%s] %s: %s\n", res.pass ? "PASS" : "FAIL", res.name.c_str(),
                res.details.c_str());
    all_pass = all_pass && res.pass;
  }
  return all_pass ? 0 : 1;
}

}  // namespace moo::acceptance
