#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "moo/core_math.hpp"
#include "moo/optimizers.hpp"
#include "moo/problems.hpp"

#include <cmath>

using moo::Batch;
using moo::Mat;
using moo::OptimizerState;
using moo::SimplexWeights;
using moo::StepMode;
using moo::Vec;

TEST_CASE("sgd takes exact gradient steps") {
  OptimizerState sgd = OptimizerState::sgd(0.1);
  Vec theta(2), g(2);
  theta << 1.0, -2.0;
  g << 0.5, 1.0;
  const Vec next = moo::optimizer_step(sgd, theta, g, StepMode::kCommit);
  CHECK(next[0] == doctest::Approx(0.95));
  CHECK(next[1] == doctest::Approx(-2.1));
}

TEST_CASE("adam's first step is near the learning rate for unit-scale gradients") {
  OptimizerState adam = OptimizerState::adam(1e-3);
  Vec theta = Vec::Zero(3);
  Vec g(3);
  g << 1.0, -2.5, 0.7;
  const Vec next = moo::optimizer_step(adam, theta, g, StepMode::kCommit);
  for (int i = 0; i < 3; ++i) {
    const double step = std::abs(next[i] - theta[i]);
    CHECK(step >= 0.000999);
    CHECK(step <= 0.001);
    CHECK(std::signbit(next[i]) == std::signbit(-g[i]));  // descends along -g
  }
}

TEST_CASE("adam steps stay bounded by the learning rate on a constant gradient") {
  OptimizerState adam = OptimizerState::adam(1e-3);
  Vec theta = Vec::Zero(2);
  Vec g(2);
  g << 3.0, -0.2;
  for (int k = 0; k < 100; ++k) {
    const Vec next = moo::optimizer_step(adam, theta, g, StepMode::kCommit);
    CHECK((next - theta).cwiseAbs().maxCoeff() <= 1e-3 + 1e-12);
    theta = next;
  }
  CHECK(adam.t == 100);
}

TEST_CASE("probe steps leave the optimizer state untouched") {
  OptimizerState adam = OptimizerState::adam(1e-3);
  Vec theta(2), g(2);
  theta << 0.5, 0.5;
  g << 1.0, -1.0;
  // Warm the state so the probe has something to clobber.
  theta = moo::optimizer_step(adam, theta, g, StepMode::kCommit);
  const Vec m_before = adam.m;
  const Vec v_before = adam.v;
  const long t_before = adam.t;

  const Vec probe1 = moo::optimizer_step(adam, theta, g, StepMode::kProbe);
  const Vec probe2 = moo::optimizer_step(adam, theta, g, StepMode::kProbe);
  CHECK((probe1 - probe2).norm() == 0.0);  // probing is idempotent
  CHECK((adam.m - m_before).norm() == 0.0);
  CHECK((adam.v - v_before).norm() == 0.0);
  CHECK(adam.t == t_before);

  // A commit from the same state must produce the same parameters as the
  // probe did, then advance the state.
  const Vec committed = moo::optimizer_step(adam, theta, g, StepMode::kCommit);
  CHECK((committed - probe1).norm() == 0.0);
  CHECK(adam.t == t_before + 1);
}

TEST_CASE("update map applies one step on the weighted loss") {
  moo::QuadraticSpec spec;
  Vec c1(2), c2(2);
  c1 << 2.0, 0.0;
  c2 << 0.0, 4.0;
  spec.centers = {c1, c2};
  spec.curvatures = {Mat::Identity(2, 2), Mat::Identity(2, 2)};
  auto prob = moo::make_quadratic_suite(spec);

  Vec theta(2);
  theta << 1.0, 1.0;
  Vec w(2);
  w << 0.25, 0.75;

  OptimizerState sgd = OptimizerState::sgd(0.1);
  const Vec via_map =
      moo::apply_A_weighted(sgd, w, theta, *prob, Batch::full(), StepMode::kProbe);
  const Vec manual =
      theta - 0.1 * prob->eval_weighted_gradient(theta, w, Batch::full());
  CHECK((via_map - manual).norm() == 0.0);

  // Simplex-weighted overload agrees with the raw-weight path.
  const Vec via_simplex = moo::apply_A(sgd, SimplexWeights(w), theta, *prob,
                                       Batch::full(), StepMode::kProbe);
  CHECK((via_simplex - via_map).norm() == 0.0);
}

TEST_CASE("sgd descends monotonically below the stability threshold") {
  moo::QuadraticSpec spec = moo::random_spd_quadratics(2, 6, 12, 1.0, 0.5, 2.0);
  auto prob = moo::make_quadratic_suite(spec);
  OptimizerState sgd = OptimizerState::sgd(0.1);  // alpha < 1/ell = 0.5
  SimplexWeights w = SimplexWeights::uniform(2);

  moo::RngState rng(3);
  Vec theta(6);
  for (int i = 0; i < 6; ++i) theta[i] = 2.0 * rng.next_gaussian();

  double prev = w.values().dot(prob->eval_losses(theta, Batch::full()));
  for (int k = 0; k < 100; ++k) {
    theta = moo::apply_A(sgd, w, theta, *prob, Batch::full(), StepMode::kCommit);
    const double cur = w.values().dot(prob->eval_losses(theta, Batch::full()));
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
}
