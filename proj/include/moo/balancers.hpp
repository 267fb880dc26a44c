#pragma once

#include "moo/core_math.hpp"

#include <optional>
#include <vector>

namespace moo {

struct MinNormResult {
  SimplexWeights weights;
  double gap;  // norm of the minimum-norm convex combination of the rows
};

// Minimum-norm point in the convex hull of the rows of G: approximately
// minimizes ||G' lambda|| over the simplex. m = 2 uses the closed form;
// m > 2 runs away-step Frank-Wolfe with exact line search until the
// Frank-Wolfe duality gap drops below 1e-10 or 500 iterations pass.
MinNormResult min_norm_solve(const Mat& G);

// Gradient surgery: each row, visiting the other tasks in random order, is
// projected off every original row it conflicts with (negative inner
// product). Returns the surgered rows; `post_projection_dots`, when given,
// collects the inner product right after each projection (should be ~0).
Mat pcgrad_surgery(const Mat& G, RngState& rng,
                   std::vector<double>* post_projection_dots = nullptr);

// Sum of the surgered rows — the combined update direction.
Vec pcgrad_combine(const Mat& G, RngState& rng);

// Linearized worst-case-decrement balancer: solves
//   min_{lambda} max_{rho} sum_i rho_i * (-alpha <g_i, G' lambda>)
// by alternating projected gradient descent-ascent (2000 iterations, step
// 0.05/sqrt(k)), tracking the best iterate under the exact objective and
// tie-breaking to the uniform point.
SimplexWeights linearized_decrement_balance(const Mat& G, double alpha);

enum class LossBalanceMethod { kLs, kSi, kRlw };

// LS: uniform. SI: weights proportional to 1/f_i (losses must be positive).
// RLW: softmax of i.i.d. standard normal draws.
SimplexWeights loss_balance_weights(LossBalanceMethod method, const Vec& losses, RngState& rng);

enum class BalancerKind { kMarigold, kMgda, kPcgrad, kLinearized, kLs, kSi, kRlw };

// What one balancing decision produced: task weights, a combined update
// direction, or both, plus the per-task gradient rows the method consumed.
struct BalancerOutput {
  std::optional<SimplexWeights> weights;
  std::optional<Vec> direction;
  long gradient_evals = 0;
};

// One baseline balancing decision (every kind except kMarigold, which runs
// its own loop). Gradient-based methods consume G and report m gradient
// evaluations; loss-only methods use just `losses`.
BalancerOutput balance(BalancerKind kind, const Mat& G, const Vec& losses, double alpha,
                       RngState& rng);

}  // namespace moo
