#pragma once

#include "moo/core_math.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace moo {

// Minibatch handle: a nonempty list of pool indices, or the distinguished
// FULL value (empty index list) meaning "all data" / deterministic problem.
struct Batch {
  std::vector<int> indices;

  bool is_full() const { return indices.empty(); }
  static Batch full() { return Batch{}; }
  static Batch of(std::vector<int> idx) { return Batch{std::move(idx)}; }
};

// Behavioral contract for an m-task problem over parameters of dimension d.
// Implementations are immutable after construction; all evaluations are pure,
// so instances can be shared across concurrently executing runs.
class MooProblem {
 public:
  virtual ~MooProblem() = default;

  int num_tasks() const { return m_; }
  int dim() const { return d_; }
  int pool_size() const { return pool_size_; }  // 0 = deterministic problem

  // Loss vector (f_1(theta;B), ..., f_m(theta;B)).
  virtual Vec eval_losses(const Vec& theta, const Batch& batch) const = 0;

  // m-by-d matrix whose row i is the gradient of task i's loss.
  virtual Mat eval_gradients(const Vec& theta, const Batch& batch) const = 0;

  // Gradient of sum_i w_i f_i in one pass; w is any weight vector of length m
  // (the training path uses simplex weights, the auxiliary path uses raw
  // weights with an unconstrained last entry).
  virtual Vec eval_weighted_gradient(const Vec& theta, const Vec& w, const Batch& batch) const = 0;

  // Per-task smoothness constants (largest Hessian eigenvalue), when known.
  virtual std::optional<Vec> smoothness() const { return std::nullopt; }

  // Human-readable description of the Pareto-stationary set, when known.
  virtual std::string certificate() const { return {}; }

 protected:
  MooProblem(int m, int d, int pool_size);
  void check_theta(const Vec& theta) const;
  void check_weights(const Vec& w) const;
  void check_batch(const Batch& batch) const;

  int m_ = 0;
  int d_ = 0;
  int pool_size_ = 0;
};

// Evaluation-count accumulators. `pertask_gevals` counts gradient rows
// (one eval_gradients call charges m), `weighted_gevals` counts one per
// weighted-gradient call, `loss_evals` counts loss-vector evaluations.
struct EvalCounters {
  long loss_evals = 0;
  long pertask_gevals = 0;
  long weighted_gevals = 0;
};

// Per-run counting facade over an immutable problem. Construct one per run;
// diagnostics that must not be charged evaluate the inner problem directly.
class CountedProblem : public MooProblem {
 public:
  explicit CountedProblem(const MooProblem& inner);

  Vec eval_losses(const Vec& theta, const Batch& batch) const override;
  Mat eval_gradients(const Vec& theta, const Batch& batch) const override;
  Vec eval_weighted_gradient(const Vec& theta, const Vec& w, const Batch& batch) const override;
  std::optional<Vec> smoothness() const override { return inner_.smoothness(); }
  std::string certificate() const override { return inner_.certificate(); }

  const MooProblem& inner() const { return inner_; }
  const EvalCounters& counters() const { return counters_; }
  void reset_counters() { counters_ = EvalCounters{}; }

 private:
  const MooProblem& inner_;
  mutable EvalCounters counters_;
};

// --- Quadratic suite: f_i(theta) = 0.5 (theta - c_i)' A_i (theta - c_i) ---

struct QuadraticSpec {
  std::vector<Vec> centers;     // one per task, all length d
  std::vector<Mat> curvatures;  // symmetric positive definite, d-by-d
};

class QuadraticSuite : public MooProblem {
 public:
  explicit QuadraticSuite(QuadraticSpec spec);

  Vec eval_losses(const Vec& theta, const Batch& batch) const override;
  Mat eval_gradients(const Vec& theta, const Batch& batch) const override;
  Vec eval_weighted_gradient(const Vec& theta, const Vec& w, const Batch& batch) const override;
  std::optional<Vec> smoothness() const override { return smoothness_; }
  std::string certificate() const override { return certificate_; }

  // For 2 tasks with identity curvature the Pareto-stationary set is the
  // segment between the centers.
  std::optional<std::pair<Vec, Vec>> pareto_segment() const;

  const QuadraticSpec& spec() const { return spec_; }

 private:
  QuadraticSpec spec_;
  Vec smoothness_;
  std::string certificate_;
  bool identity_pair_ = false;
};

// --- Shared-bottom MLP regression: tanh trunk + per-task scalar heads ---

struct MlpSpec {
  int input_dim = 0;
  std::vector<int> shared_widths;                    // at least one layer
  std::vector<std::vector<int>> head_hidden_widths;  // one entry per task (may be empty lists)
  std::uint64_t data_seed = 0;
  int pool_size = 0;
  double noise_scale = 0.0;
};

class MlpProblem : public MooProblem {
 public:
  explicit MlpProblem(MlpSpec spec);

  Vec eval_losses(const Vec& theta, const Batch& batch) const override;
  Mat eval_gradients(const Vec& theta, const Batch& batch) const override;
  Vec eval_weighted_gradient(const Vec& theta, const Vec& w, const Batch& batch) const override;

  const MlpSpec& spec() const { return spec_; }
  const Mat& pool_inputs() const { return inputs_; }   // pool_size x input_dim
  const Mat& pool_targets() const { return targets_; } // pool_size x m

 private:
  struct LayerShape {
    int in = 0, out = 0, offset = 0;  // offset into the flat parameter vector
  };
  // Gradient of the w-weighted loss via one forward + one backward pass,
  // with per-head output deltas scaled by w. Also reports the loss vector.
  // Skips the backward pass when w is identically zero (pure loss eval).
  Vec weighted_backward(const Vec& theta, const Vec& w, const Batch& batch, Vec* losses_out) const;

  MlpSpec spec_;
  std::vector<LayerShape> shared_layers_;
  std::vector<std::vector<LayerShape>> head_layers_;  // per task, last layer has out == 1
  Mat inputs_;
  Mat targets_;
};

// --- Auxiliary-learning structure: main tasks plus one auxiliary task ---
//
// Tasks 0..n_main-1 are main tasks, task n_main is the auxiliary. The lower
// level trains on weights (1, ..., 1, omega); the upper level minimizes the
// loss of the designated target task. All components are quadratics.

struct AuxProblemSpec {
  QuadraticSpec main_tasks;
  Vec aux_center;
  Mat aux_curvature;
  int target_index = 0;  // which main task the upper level minimizes
};

class AuxProblem : public MooProblem {
 public:
  explicit AuxProblem(AuxProblemSpec spec);

  Vec eval_losses(const Vec& theta, const Batch& batch) const override;
  Mat eval_gradients(const Vec& theta, const Batch& batch) const override;
  Vec eval_weighted_gradient(const Vec& theta, const Vec& w, const Batch& batch) const override;
  std::optional<Vec> smoothness() const override { return all_.smoothness(); }

  int n_main() const { return m_ - 1; }
  int target_index() const { return target_index_; }
  int aux_index() const { return m_ - 1; }

  // Lower-level weight vector (1, ..., 1, omega).
  Vec lower_level_weights(double omega) const;

 private:
  QuadraticSuite all_;  // main tasks followed by the auxiliary task
  int target_index_ = 0;
};

// Uniform without-replacement batch of `size` indices; deterministic given
// rng. Deterministic problems (pool_size == 0) always yield FULL.
Batch sample_batch(const MooProblem& problem, RngState& rng, int size);

std::unique_ptr<QuadraticSuite> make_quadratic_suite(QuadraticSpec spec);
std::unique_ptr<MlpProblem> make_mlp_problem(MlpSpec spec);
std::unique_ptr<AuxProblem> make_aux_problem(AuxProblemSpec spec);

// Convenience generators used by tests, benchmarks, and the CLI.

// m identity-curvature quadratics with centers drawn N(0, scale^2 I).
QuadraticSpec random_identity_quadratics(int m, int d, std::uint64_t gen_seed, double center_scale);

// m random SPD-curvature quadratics; eigenvalues uniform in [eig_min, eig_max].
QuadraticSpec random_spd_quadratics(int m, int d, std::uint64_t gen_seed, double center_scale,
                                    double eig_min, double eig_max);

}  // namespace moo
