#pragma once

#include "moo/core_math.hpp"
#include "moo/optimizers.hpp"
#include "moo/problems.hpp"

#include <optional>
#include <utility>

namespace moo {

// Where the zeroth-order perturbation lives. kLogit perturbs the trainable
// logits and maps through the softmax parameterization (weights stay
// feasible); kDirect perturbs the weights themselves (clip at 0,
// renormalize) as an ablation, and the state vectors then hold weights
// rather than logits.
enum class PerturbMode { kLogit, kDirect };

// Whether the min (u) and max (v) sides update every iteration or alternate
// (even iterations update u, odd update v).
enum class UpdateSchedule { kSimultaneous, kAlternating };

// Whether the committed training step reuses the probe's batch (one batch per
// iteration) or draws a fresh one.
enum class BatchPolicy { kReuse, kResample };

// Upper-level state: trainable logits u (task weights lambda) and v (adversary
// weights rho), temperature beta, perturbation scale r, and one upper-level
// optimizer per side. The parameterization is lambda = softmax(beta * u / f)
// with f the most recent base losses (strictly positive).
struct MarigoldState {
  Vec u;
  Vec v;
  double beta = 1.0;
  double r = 1e-3;
  OptimizerState opt_u = OptimizerState::adam(1e-4);
  OptimizerState opt_v = OptimizerState::adam(1e-4);
  Vec last_losses;  // base losses seen by the most recent step (empty before)
  PerturbMode perturb_mode = PerturbMode::kLogit;
  UpdateSchedule schedule = UpdateSchedule::kSimultaneous;
  BatchPolicy batch_policy = BatchPolicy::kReuse;
  int batch_size = 0;  // 0 = full batch
  long step_count = 0;

  static MarigoldState init(int m, PerturbMode mode = PerturbMode::kLogit);
};

struct ProbeRecord {
  Vec direction;         // unit vector sampled for the perturbation
  Vec perturbed_losses;  // f_i(A(lambda', theta); B)
  Vec base_losses;       // f_i(theta; B)
};

// Zeroth-order hypergradient estimate expressed in the trainable coordinates:
// g_u for the lambda side (sampled directly in logit space), g_v for the rho
// side (loss differences mapped through the softmax chain rule).
struct HypergradEstimate {
  Vec g_u;
  Vec g_v;
  ProbeRecord probe;
};

// (lambda, rho) from the current state and loss vector.
std::pair<SimplexWeights, SimplexWeights> marigold_weights(const MarigoldState& state,
                                                           const Vec& losses);

// Worst-case decrement R(lambda, theta) = max_i [f_i(A(lambda,theta)) - f_i(theta)],
// evaluated with a probe step (optimizer state untouched).
double worst_case_decrement(const SimplexWeights& lambda, const Vec& theta,
                            const MooProblem& problem, const Batch& batch,
                            const OptimizerState& optimizer);

// Surrogate objective Phi(lambda, rho) = sum_i rho_i [f_i(A(lambda,theta)) - f_i(theta)]
// at the current iterate theta; exact evaluation for oracles and logging.
double surrogate_value(const SimplexWeights& lambda, const SimplexWeights& rho, const Vec& theta,
                       const MooProblem& problem, const Batch& batch,
                       const OptimizerState& optimizer);

// Single-point hypergradient estimate: samples one unit direction in the
// perturbation space, probes A at the perturbed weights, and assembles both
// estimators. Charges exactly 1 weighted-gradient and 2 loss-vector
// evaluations regardless of task count.
HypergradEstimate hypergrad(const MarigoldState& state, const Vec& theta,
                            const MooProblem& problem, const Batch& batch,
                            const OptimizerState& optimizer, RngState& rng);

// Same estimator with a caller-supplied unit direction (deterministic
// probing; antithetic pairing via +/- the same direction).
HypergradEstimate hypergrad_with_direction(const MarigoldState& state, const Vec& theta,
                                           const MooProblem& problem, const Batch& batch,
                                           const OptimizerState& optimizer, const Vec& direction);

// Central finite differences of the surrogate through the softmax
// parameterization, in the logit coordinates. Returns the stacked vector
// [d/du; d/dv] of length 2m. Test oracle (O(h^2) truncation).
Vec exact_surrogate_hypergrad_fd(const Vec& u_logits, const Vec& v_logits, double beta,
                                 const Vec& theta, const MooProblem& problem, const Batch& batch,
                                 const OptimizerState& optimizer, double h);

struct MarigoldStepResult {
  Vec theta;             // committed parameters
  SimplexWeights lambda; // weights used for the committed step
  SimplexWeights rho;
  HypergradEstimate estimate;
  Vec post_losses;       // losses after the committed step, on the commit batch
  double decrement;      // max_i (post - base); realized worst-case decrement
};

// One full training iteration: estimate the hypergradient, update u (descent)
// and v (ascent) with the upper-level optimizers, recompute (lambda, rho),
// and commit one lower-level step. Charges exactly 2 weighted-gradient and 3
// loss-vector evaluations per call.
MarigoldStepResult marigold_step(MarigoldState& state, const Vec& theta,
                                 const MooProblem& problem, OptimizerState& optimizer,
                                 RngState& rng);

// --- Generalized upper objective (worst-case decrement or a designated
// --- main task's loss with an auxiliary-task weight omega) ---

struct UpperObjective {
  enum class Kind { kWorstCaseDecrement, kMainTaskLoss };
  Kind kind = Kind::kWorstCaseDecrement;
};

// Scalar auxiliary-task weight trained by the d=1 zeroth-order estimator
// (directions sampled from {-1, +1}).
struct AuxiliaryState {
  double omega = 0.0;
  OptimizerState opt_omega = OptimizerState::adam(1e-2);
  double r = 1e-1;
  int batch_size = 0;
  long step_count = 0;
};

struct GeneralizedState {
  UpperObjective objective;
  MarigoldState marigold;  // used when kind == kWorstCaseDecrement
  AuxiliaryState aux;      // used when kind == kMainTaskLoss
};

struct GeneralizedStepResult {
  Vec theta;
  Vec weights;       // weight vector of the committed step (simplex, or (1,...,1,omega))
  Vec base_losses;
  Vec post_losses;
  double upper_value;  // realized decrement, or the target task's post-step loss
  double omega;        // NaN outside the auxiliary mode
  std::optional<MarigoldStepResult> marigold;  // populated in decrement mode
};

// With the worst-case-decrement objective this delegates to marigold_step
// (same RNG consumption, bit-identical trajectory). With the main-task-loss
// objective the problem must be an AuxProblem; omega is updated by the d=1
// estimator and the lower level trains on weights (1, ..., 1, omega).
GeneralizedStepResult generalized_step(GeneralizedState& state, const Vec& theta,
                                       const MooProblem& problem, OptimizerState& optimizer,
                                       RngState& rng);

}  // namespace moo
