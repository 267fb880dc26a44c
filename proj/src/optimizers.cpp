#include "moo/optimizers.hpp"

#include <cmath>
#include <stdexcept>

namespace moo {

namespace {
void check_optimizer(const OptimizerState& s) {
  if (!(s.alpha > 0.0)) throw std::invalid_argument("OptimizerState: alpha must be > 0");
  if (s.kind == OptimizerState::Kind::kAdam) {
    if (s.beta1 < 0.0 || s.beta1 >= 1.0 || s.beta2 < 0.0 || s.beta2 >= 1.0)
      throw std::invalid_argument("OptimizerState: betas must lie in [0, 1)");
    if (!(s.eps > 0.0)) throw std::invalid_argument("OptimizerState: eps must be > 0");
  }
  if (s.t < 0) throw std::invalid_argument("OptimizerState: step counter must be >= 0");
}
}  // namespace

OptimizerState OptimizerState::sgd(double alpha) {
  OptimizerState s;
  s.kind = Kind::kSgd;
  s.alpha = alpha;
  check_optimizer(s);
  return s;
}

OptimizerState OptimizerState::adam(double alpha, double beta1, double beta2, double eps) {
  OptimizerState s;
  s.kind = Kind::kAdam;
  s.alpha = alpha;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  check_optimizer(s);
  return s;
}

Vec sgd_step(const OptimizerState& state, const Vec& theta, const Vec& g) {
  if (theta.size() != g.size()) throw std::invalid_argument("sgd_step: dimension mismatch");
  return theta - state.alpha * g;
}

Vec adam_step(OptimizerState& state, const Vec& theta, const Vec& g) {
  if (theta.size() != g.size()) throw std::invalid_argument("adam_step: dimension mismatch");
  if (state.m.size() == 0) {
    state.m = Vec::Zero(theta.size());
    state.v = Vec::Zero(theta.size());
  }
  if (state.m.size() != theta.size()) throw std::invalid_argument("adam_step: moment dimension mismatch");
  state.t += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * g;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * g.cwiseProduct(g);
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  Vec m_hat = state.m / bc1;
  Vec v_hat = state.v / bc2;
  Vec denom = (v_hat.array().sqrt() + state.eps).matrix();
  return theta - state.alpha * m_hat.cwiseQuotient(denom);
}

Vec optimizer_step(OptimizerState& state, const Vec& theta, const Vec& g, StepMode mode) {
  if (state.kind == OptimizerState::Kind::kSgd) return sgd_step(state, theta, g);
  if (mode == StepMode::kProbe) {
    OptimizerState snapshot = state;  // moments copied; original untouched
    return adam_step(snapshot, theta, g);
  }
  return adam_step(state, theta, g);
}

Vec apply_A(OptimizerState& state, const SimplexWeights& lambda, const Vec& theta,
            const MooProblem& problem, const Batch& batch, StepMode mode) {
  return apply_A_weighted(state, lambda.values(), theta, problem, batch, mode);
}

Vec apply_A_weighted(OptimizerState& state, const Vec& w, const Vec& theta,
                     const MooProblem& problem, const Batch& batch, StepMode mode) {
  Vec g = problem.eval_weighted_gradient(theta, w, batch);
  return optimizer_step(state, theta, g, mode);
}

}  // namespace moo
