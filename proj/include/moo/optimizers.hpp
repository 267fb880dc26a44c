#pragma once

#include "moo/core_math.hpp"
#include "moo/problems.hpp"

namespace moo {

// PROBE evaluates a step on a snapshot (no state mutation); COMMIT advances
// the optimizer state. PROBE and COMMIT from identical inputs produce the
// same parameters, and arbitrary PROBE interleavings never affect later
// COMMIT results.
enum class StepMode { kProbe, kCommit };

// State of the update map A(lambda, theta): one SGD or Adam step on the
// weighted loss. Value semantics — copying yields an independent snapshot.
struct OptimizerState {
  enum class Kind { kSgd, kAdam };

  Kind kind = Kind::kSgd;
  double alpha = 0.0;

  // Adam-only fields (canonical constants, bias-corrected update).
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Vec m;  // first moment, sized lazily on the first step
  Vec v;  // second moment
  long t = 0;

  static OptimizerState sgd(double alpha);
  static OptimizerState adam(double alpha, double beta1 = 0.9, double beta2 = 0.999,
                             double eps = 1e-8);
};

// theta' = theta - alpha * g. Stateless, hence pure.
Vec sgd_step(const OptimizerState& state, const Vec& theta, const Vec& g);

// One bias-corrected Adam step; mutates moments and the step counter.
Vec adam_step(OptimizerState& state, const Vec& theta, const Vec& g);

// Dispatch on state.kind; PROBE works on an internal snapshot.
Vec optimizer_step(OptimizerState& state, const Vec& theta, const Vec& g, StepMode mode);

// The update map A(lambda, theta): one optimizer step on the lambda-weighted
// loss. Charges exactly one weighted-gradient evaluation on `problem`.
Vec apply_A(OptimizerState& state, const SimplexWeights& lambda, const Vec& theta,
            const MooProblem& problem, const Batch& batch, StepMode mode);

// Same map with a raw weight vector (auxiliary-learning path, where the last
// weight is an unconstrained scalar).
Vec apply_A_weighted(OptimizerState& state, const Vec& w, const Vec& theta,
                     const MooProblem& problem, const Batch& batch, StepMode mode);

}  // namespace moo
