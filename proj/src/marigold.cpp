#include "moo/marigold.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace moo {

namespace {

void check_positive_losses(const Vec& losses) {
  for (Eigen::Index i = 0; i < losses.size(); ++i) {
    if (!(losses[i] > 0.0))
      throw std::domain_error("marigold: parameterization needs strictly positive losses");
  }
}

// lambda' from perturbing the trainable coordinates by r * e.
SimplexWeights perturbed_weights(const MarigoldState& state, const Vec& base, const Vec& losses,
                                 const Vec& e) {
  if (state.perturb_mode == PerturbMode::kLogit) {
    Vec logits = state.beta * (base + state.r * e).cwiseQuotient(losses);
    return softmax(logits);
  }
  Vec raw = (base + state.r * e).cwiseMax(0.0);
  double s = raw.sum();
  if (s <= 0.0) return SimplexWeights::uniform(static_cast<int>(base.size()));
  return SimplexWeights(raw / s);
}

Batch pick_batch(const MooProblem& problem, RngState& rng, int batch_size) {
  if (problem.pool_size() == 0 || batch_size <= 0) return Batch::full();
  return sample_batch(problem, rng, batch_size);
}

}  // namespace

MarigoldState MarigoldState::init(int m, PerturbMode mode) {
  if (m < 1) throw std::invalid_argument("MarigoldState::init: m must be >= 1");
  MarigoldState s;
  s.perturb_mode = mode;
  if (mode == PerturbMode::kLogit) {
    s.u = Vec::Zero(m);
    s.v = Vec::Zero(m);
  } else {
    s.u = Vec::Constant(m, 1.0 / m);
    s.v = Vec::Constant(m, 1.0 / m);
  }
  return s;
}

std::pair<SimplexWeights, SimplexWeights> marigold_weights(const MarigoldState& state,
                                                           const Vec& losses) {
  if (state.u.size() != losses.size() || state.v.size() != losses.size())
    throw std::invalid_argument("marigold_weights: dimension mismatch");
  if (!(state.beta > 0.0)) throw std::invalid_argument("marigold_weights: beta must be > 0");
  if (state.perturb_mode == PerturbMode::kDirect) {
    return {SimplexWeights(state.u), SimplexWeights(state.v)};
  }
  check_positive_losses(losses);
  SimplexWeights lambda = softmax(state.beta * state.u.cwiseQuotient(losses));
  SimplexWeights rho = softmax(state.beta * state.v.cwiseQuotient(losses));
  return {lambda, rho};
}

double worst_case_decrement(const SimplexWeights& lambda, const Vec& theta,
                            const MooProblem& problem, const Batch& batch,
                            const OptimizerState& optimizer) {
  Vec base = problem.eval_losses(theta, batch);
  OptimizerState probe = optimizer;
  Vec theta_after = apply_A(probe, lambda, theta, problem, batch, StepMode::kProbe);
  Vec after = problem.eval_losses(theta_after, batch);
  return (after - base).maxCoeff();
}

double surrogate_value(const SimplexWeights& lambda, const SimplexWeights& rho, const Vec& theta,
                       const MooProblem& problem, const Batch& batch,
                       const OptimizerState& optimizer) {
  Vec base = problem.eval_losses(theta, batch);
  OptimizerState probe = optimizer;
  Vec theta_after = apply_A(probe, lambda, theta, problem, batch, StepMode::kProbe);
  Vec after = problem.eval_losses(theta_after, batch);
  return rho.values().dot(after - base);
}

HypergradEstimate hypergrad_with_direction(const MarigoldState& state, const Vec& theta,
                                           const MooProblem& problem, const Batch& batch,
                                           const OptimizerState& optimizer, const Vec& direction) {
  const int m = problem.num_tasks();
  if (m < 2) throw std::invalid_argument("hypergrad: needs at least 2 tasks");
  if (!(state.r > 0.0)) throw std::invalid_argument("hypergrad: r must be > 0");
  if (direction.size() != m) throw std::invalid_argument("hypergrad: direction dimension mismatch");
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("hypergrad: direction must be unit norm");

  Vec base_losses = problem.eval_losses(theta, batch);
  auto [lambda, rho] = marigold_weights(state, base_losses);
  SimplexWeights lambda_perturbed =
      perturbed_weights(state, state.u, base_losses, direction);

  OptimizerState probe_opt = optimizer;
  Vec theta_probe = apply_A(probe_opt, lambda_perturbed, theta, problem, batch, StepMode::kProbe);
  Vec perturbed_losses = problem.eval_losses(theta_probe, batch);

  HypergradEstimate est;
  est.g_u = (static_cast<double>(m) / state.r) * rho.values().dot(perturbed_losses) * direction;
  Vec delta = perturbed_losses - base_losses;
  if (state.perturb_mode == PerturbMode::kLogit) {
    // Chain rule of rho = softmax(beta * v / f) applied to dPhi/drho = delta.
    const double mean = rho.values().dot(delta);
    est.g_v = (state.beta * rho.values().array() / base_losses.array() * (delta.array() - mean))
                  .matrix();
  } else {
    est.g_v = delta;
  }
  est.probe = ProbeRecord{direction, std::move(perturbed_losses), std::move(base_losses)};
  return est;
}

HypergradEstimate hypergrad(const MarigoldState& state, const Vec& theta,
                            const MooProblem& problem, const Batch& batch,
                            const OptimizerState& optimizer, RngState& rng) {
  Vec e = sample_unit_sphere(rng, problem.num_tasks());
  return hypergrad_with_direction(state, theta, problem, batch, optimizer, e);
}

Vec exact_surrogate_hypergrad_fd(const Vec& u_logits, const Vec& v_logits, double beta,
                                 const Vec& theta, const MooProblem& problem, const Batch& batch,
                                 const OptimizerState& optimizer, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("exact_surrogate_hypergrad_fd: h must be > 0");
  const int m = problem.num_tasks();
  if (u_logits.size() != m || v_logits.size() != m)
    throw std::invalid_argument("exact_surrogate_hypergrad_fd: logit dimension mismatch");
  Vec f_base = problem.eval_losses(theta, batch);
  check_positive_losses(f_base);

  auto phi = [&](const Vec& ul, const Vec& vl) {
    SimplexWeights lambda = softmax(beta * ul.cwiseQuotient(f_base));
    SimplexWeights rho = softmax(beta * vl.cwiseQuotient(f_base));
    return surrogate_value(lambda, rho, theta, problem, batch, optimizer);
  };

  Vec out(2 * m);
  for (int i = 0; i < m; ++i) {
    Vec up = u_logits, um = u_logits;
    up[i] += h;
    um[i] -= h;
    out[i] = (phi(up, v_logits) - phi(um, v_logits)) / (2.0 * h);
  }
  for (int i = 0; i < m; ++i) {
    Vec vp = v_logits, vm = v_logits;
    vp[i] += h;
    vm[i] -= h;
    out[m + i] = (phi(u_logits, vp) - phi(u_logits, vm)) / (2.0 * h);
  }
  return out;
}

MarigoldStepResult marigold_step(MarigoldState& state, const Vec& theta,
                                 const MooProblem& problem, OptimizerState& optimizer,
                                 RngState& rng) {
  Batch batch = pick_batch(problem, rng, state.batch_size);
  HypergradEstimate est = hypergrad(state, theta, problem, batch, optimizer, rng);

  const bool do_u = state.schedule == UpdateSchedule::kSimultaneous || state.step_count % 2 == 0;
  const bool do_v = state.schedule == UpdateSchedule::kSimultaneous || state.step_count % 2 == 1;
  if (do_u) {
    Vec u_new = optimizer_step(state.opt_u, state.u, est.g_u, StepMode::kCommit);
    state.u = state.perturb_mode == PerturbMode::kDirect ? project_to_simplex(u_new) : u_new;
  }
  if (do_v) {
    Vec v_new = optimizer_step(state.opt_v, state.v, Vec(-est.g_v), StepMode::kCommit);  // ascent
    state.v = state.perturb_mode == PerturbMode::kDirect ? project_to_simplex(v_new) : v_new;
  }
  state.last_losses = est.probe.base_losses;

  auto [lambda, rho] = marigold_weights(state, est.probe.base_losses);
  Batch commit_batch = batch;
  if (state.batch_policy == BatchPolicy::kResample)
    commit_batch = pick_batch(problem, rng, state.batch_size);
  Vec theta_next = apply_A(optimizer, lambda, theta, problem, commit_batch, StepMode::kCommit);
  Vec post_losses = problem.eval_losses(theta_next, commit_batch);
  double decrement = (post_losses - est.probe.base_losses).maxCoeff();
  state.step_count += 1;

  return MarigoldStepResult{std::move(theta_next), lambda, rho, std::move(est),
                            std::move(post_losses), decrement};
}

GeneralizedStepResult generalized_step(GeneralizedState& state, const Vec& theta,
                                       const MooProblem& problem, OptimizerState& optimizer,
                                       RngState& rng) {
  if (state.objective.kind == UpperObjective::Kind::kWorstCaseDecrement) {
    MarigoldStepResult res = marigold_step(state.marigold, theta, problem, optimizer, rng);
    GeneralizedStepResult out;
    out.theta = res.theta;
    out.weights = res.lambda.values();
    out.base_losses = res.estimate.probe.base_losses;
    out.post_losses = res.post_losses;
    out.upper_value = res.decrement;
    out.omega = std::numeric_limits<double>::quiet_NaN();
    out.marigold = std::move(res);
    return out;
  }

  const auto* aux_problem = dynamic_cast<const AuxProblem*>(&problem);
  const CountedProblem* counted = dynamic_cast<const CountedProblem*>(&problem);
  if (!aux_problem && counted) aux_problem = dynamic_cast<const AuxProblem*>(&counted->inner());
  if (!aux_problem)
    throw std::invalid_argument("generalized_step: main-task-loss objective needs an AuxProblem");
  AuxiliaryState& aux = state.aux;
  if (!(aux.r > 0.0)) throw std::invalid_argument("generalized_step: r must be > 0");
  const int target = aux_problem->target_index();

  Batch batch = pick_batch(problem, rng, aux.batch_size);
  Vec base_losses = problem.eval_losses(theta, batch);

  // d = 1 single-point estimator; the 1-D unit sphere is {-1, +1}.
  const double v1 = sample_unit_sphere(rng, 1)[0];
  Vec w_probe = aux_problem->lower_level_weights(aux.omega + aux.r * v1);
  OptimizerState probe_opt = optimizer;
  Vec theta_probe =
      apply_A_weighted(probe_opt, w_probe, theta, problem, batch, StepMode::kProbe);
  Vec probe_losses = problem.eval_losses(theta_probe, batch);
  const double g_omega = probe_losses[target] * v1 / aux.r;

  Vec omega_vec(1), g_vec(1);
  omega_vec[0] = aux.omega;
  g_vec[0] = g_omega;
  aux.omega = optimizer_step(aux.opt_omega, omega_vec, g_vec, StepMode::kCommit)[0];
  aux.step_count += 1;

  Vec w_commit = aux_problem->lower_level_weights(aux.omega);
  Vec theta_next = apply_A_weighted(optimizer, w_commit, theta, problem, batch, StepMode::kCommit);
  Vec post_losses = problem.eval_losses(theta_next, batch);

  GeneralizedStepResult out;
  out.theta = std::move(theta_next);
  out.weights = std::move(w_commit);
  out.base_losses = std::move(base_losses);
  out.upper_value = post_losses[target];
  out.post_losses = std::move(post_losses);
  out.omega = aux.omega;
  return out;
}

}  // namespace moo
