#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "moo/core_math.hpp"
#include "moo/problems.hpp"

#include <cmath>
#include <set>

using moo::Batch;
using moo::Mat;
using moo::RngState;
using moo::Vec;

namespace {

moo::QuadraticSpec two_identity_tasks() {
  moo::QuadraticSpec spec;
  Vec c1(2), c2(2);
  c1 << 1.0, 0.0;
  c2 << -1.0, 0.0;
  spec.centers = {c1, c2};
  spec.curvatures = {Mat::Identity(2, 2), Mat::Identity(2, 2)};
  return spec;
}

}  // namespace

TEST_CASE("quadratic losses and gradients match the closed forms") {
  auto prob = moo::make_quadratic_suite(two_identity_tasks());
  CHECK(prob->num_tasks() == 2);
  CHECK(prob->dim() == 2);
  CHECK(prob->pool_size() == 0);

  Vec theta(2);
  theta << 0.5, 2.0;
  const Vec losses = prob->eval_losses(theta, Batch::full());
  CHECK(losses[0] == doctest::Approx(0.5 * (0.25 + 4.0)));  // ||(−0.5,2)||²/2
  CHECK(losses[1] == doctest::Approx(0.5 * (2.25 + 4.0)));

  const Mat G = prob->eval_gradients(theta, Batch::full());
  CHECK(G(0, 0) == doctest::Approx(-0.5));
  CHECK(G(0, 1) == doctest::Approx(2.0));
  CHECK(G(1, 0) == doctest::Approx(1.5));
  CHECK(G(1, 1) == doctest::Approx(2.0));

  // Weighted gradients accept general (non-simplex) weights.
  Vec w(2);
  w << 1.0, 0.5;
  const Vec gw = prob->eval_weighted_gradient(theta, w, Batch::full());
  CHECK((gw - (G.row(0).transpose() + 0.5 * G.row(1).transpose())).norm() <= 1e-14);
}

TEST_CASE("quadratic suite reports smoothness and a pareto segment") {
  auto prob = moo::make_quadratic_suite(two_identity_tasks());
  const auto ell = prob->smoothness();
  REQUIRE(ell.has_value());
  CHECK((*ell)[0] == doctest::Approx(1.0));
  CHECK((*ell)[1] == doctest::Approx(1.0));
  CHECK_FALSE(prob->certificate().empty());

  const auto segment = prob->pareto_segment();
  REQUIRE(segment.has_value());
  // Segment endpoints are the two centers; its midpoint is Pareto stationary:
  // the min-norm combination of the two gradients vanishes there.
  const Vec mid = 0.5 * (segment->first + segment->second);
  const Mat G = prob->eval_gradients(mid, Batch::full());
  CHECK((0.5 * G.row(0) + 0.5 * G.row(1)).norm() <= 1e-12);
}

TEST_CASE("quadratic validation rejects asymmetric or indefinite curvatures") {
  moo::QuadraticSpec bad = two_identity_tasks();
  bad.curvatures[0](0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(moo::make_quadratic_suite(bad), std::invalid_argument);

  moo::QuadraticSpec zero_eig = two_identity_tasks();
  zero_eig.curvatures[1] = Mat::Zero(2, 2);
  CHECK_THROWS_AS(moo::make_quadratic_suite(zero_eig), std::invalid_argument);
}

TEST_CASE("generated instances are reproducible and well-formed") {
  const moo::QuadraticSpec a = moo::random_identity_quadratics(3, 4, 99, 1.5);
  const moo::QuadraticSpec b = moo::random_identity_quadratics(3, 4, 99, 1.5);
  REQUIRE(a.centers.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK((a.centers[i] - b.centers[i]).norm() == 0.0);
    CHECK(a.curvatures[i].isIdentity(0.0));
  }
  const moo::QuadraticSpec c = moo::random_identity_quadratics(3, 4, 100, 1.5);
  CHECK((a.centers[0] - c.centers[0]).norm() > 0.0);

  const moo::QuadraticSpec spd = moo::random_spd_quadratics(2, 5, 7, 1.0, 0.5, 2.0);
  for (const Mat& A : spd.curvatures) {
    CHECK((A - A.transpose()).norm() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    CHECK(es.eigenvalues().minCoeff() >= 0.5 - 1e-9);
    CHECK(es.eigenvalues().maxCoeff() <= 2.0 + 1e-9);
  }
}

TEST_CASE("mlp weighted gradients agree with finite differences") {
  moo::MlpSpec spec;
  spec.input_dim = 3;
  spec.shared_widths = {5};
  spec.head_hidden_widths = {{4}, {}};  // one hidden head, one linear head
  spec.data_seed = 42;
  spec.pool_size = 16;
  spec.noise_scale = 0.1;
  auto prob = moo::make_mlp_problem(spec);
  CHECK(prob->num_tasks() == 2);
  CHECK(prob->pool_size() == 16);

  RngState rng(5);
  Vec theta(prob->dim());
  for (int i = 0; i < theta.size(); ++i) theta[i] = 0.5 * rng.next_gaussian();
  Vec w(2);
  w << 0.7, 0.3;
  const Batch batch = Batch::of({0, 3, 7, 12});

  const Vec grad = prob->eval_weighted_gradient(theta, w, batch);
  const double h = 1e-6;
  for (int i = 0; i < theta.size(); i += 7) {  // spot-check a spread of coordinates
    Vec tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    const double fp = w.dot(prob->eval_losses(tp, batch));
    const double fm = w.dot(prob->eval_losses(tm, batch));
    const double fd = (fp - fm) / (2 * h);
    CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
  }

  // Per-task gradient rows equal one-hot weighted gradients.
  const Mat G = prob->eval_gradients(theta, batch);
  for (int t = 0; t < 2; ++t) {
    Vec onehot = Vec::Zero(2);
    onehot[t] = 1.0;
    CHECK((G.row(t).transpose() - prob->eval_weighted_gradient(theta, onehot, batch)).norm() <=
          1e-14);
  }

  // All-zero weights short-circuit to a zero gradient.
  CHECK(prob->eval_weighted_gradient(theta, Vec::Zero(2), batch).norm() == 0.0);
}

TEST_CASE("mlp batch losses are means that aggregate consistently") {
  moo::MlpSpec spec;
  spec.input_dim = 2;
  spec.shared_widths = {4};
  spec.head_hidden_widths = {{}, {}};
  spec.data_seed = 8;
  spec.pool_size = 10;
  spec.noise_scale = 0.0;
  auto prob = moo::make_mlp_problem(spec);

  RngState rng(6);
  Vec theta(prob->dim());
  for (int i = 0; i < theta.size(); ++i) theta[i] = 0.3 * rng.next_gaussian();

  const Batch b1 = Batch::of({0, 1, 2, 3});
  const Batch b2 = Batch::of({4, 5, 6, 7, 8, 9});
  const Vec full = prob->eval_losses(theta, Batch::full());
  const Vec l1 = prob->eval_losses(theta, b1);
  const Vec l2 = prob->eval_losses(theta, b2);
  CHECK((full - (4.0 * l1 + 6.0 * l2) / 10.0).norm() <= 1e-12);

  // Same spec, same data.
  auto prob2 = moo::make_mlp_problem(spec);
  CHECK((prob2->eval_losses(theta, Batch::full()) - full).norm() == 0.0);
}

TEST_CASE("aux problems append one auxiliary task") {
  moo::AuxProblemSpec spec;
  spec.main_tasks = moo::random_identity_quadratics(3, 4, 77, 1.0);
  spec.target_index = 1;
  spec.aux_center = spec.main_tasks.centers[1];      // aligned construction
  spec.aux_curvature = spec.main_tasks.curvatures[1];
  auto prob = moo::make_aux_problem(spec);

  CHECK(prob->num_tasks() == 4);
  CHECK(prob->n_main() == 3);
  CHECK(prob->target_index() == 1);
  CHECK(prob->aux_index() == 3);

  RngState rng(9);
  Vec theta(4);
  for (int i = 0; i < 4; ++i) theta[i] = rng.next_gaussian();
  const Vec losses = prob->eval_losses(theta, Batch::full());
  CHECK(losses[3] == doctest::Approx(losses[1]));  // aligned aux mirrors the target

  const Vec w = prob->lower_level_weights(0.25);
  REQUIRE(w.size() == 4);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 1.0);
  CHECK(w[3] == 0.25);
}

TEST_CASE("batch sampling draws distinct in-range indices deterministically") {
  moo::MlpSpec spec;
  spec.input_dim = 2;
  spec.shared_widths = {3};
  spec.head_hidden_widths = {{}};
  spec.data_seed = 1;
  spec.pool_size = 20;
  auto prob = moo::make_mlp_problem(spec);

  RngState r1(33), r2(33);
  const Batch a = moo::sample_batch(*prob, r1, 8);
  const Batch b = moo::sample_batch(*prob, r2, 8);
  REQUIRE(a.indices.size() == 8);
  CHECK(a.indices == b.indices);
  std::set<int> seen;
  for (int idx : a.indices) {
    CHECK(idx >= 0);
    CHECK(idx < 20);
    CHECK(seen.insert(idx).second);  // no duplicates
  }

  auto quad = moo::make_quadratic_suite(two_identity_tasks());
  CHECK(moo::sample_batch(*quad, r1, 8).is_full());  // pool-free problems
}

TEST_CASE("counting facade charges the documented costs") {
  auto prob = moo::make_quadratic_suite(two_identity_tasks());
  moo::CountedProblem counted(*prob);
  CHECK(&counted.inner() == prob.get());

  Vec theta(2);
  theta << 0.3, -0.2;
  (void)counted.eval_losses(theta, Batch::full());
  CHECK(counted.counters().loss_evals == 1);
  (void)counted.eval_gradients(theta, Batch::full());
  CHECK(counted.counters().pertask_gevals == 2);  // one per task
  Vec w(2);
  w << 0.5, 0.5;
  (void)counted.eval_weighted_gradient(theta, w, Batch::full());
  CHECK(counted.counters().weighted_gevals == 1);

  counted.reset_counters();
  CHECK(counted.counters().loss_evals == 0);
  CHECK(counted.counters().pertask_gevals == 0);
  CHECK(counted.counters().weighted_gevals == 0);

  // The facade must not perturb values.
  CHECK((counted.eval_losses(theta, Batch::full()) -
         prob->eval_losses(theta, Batch::full()))
            .norm() == 0.0);
}

TEST_CASE("problem preconditions reject malformed queries") {
  auto prob = moo::make_quadratic_suite(two_identity_tasks());
  Vec wrong_dim(3);
  wrong_dim << 0, 0, 0;
  CHECK_THROWS_AS(prob->eval_losses(wrong_dim, Batch::full()), std::invalid_argument);
  Vec theta(2);
  theta << 0, 0;
  Vec wrong_w(3);
  wrong_w << 1, 1, 1;
  CHECK_THROWS_AS(prob->eval_weighted_gradient(theta, wrong_w, Batch::full()),
                  std::invalid_argument);
  // Quadratics have no sample pool: non-full batches are rejected.
  CHECK_THROWS_AS(prob->eval_losses(theta, Batch::of({0})), std::invalid_argument);
}
