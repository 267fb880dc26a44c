#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "moo/balancers.hpp"
#include "moo/core_math.hpp"

#include <cmath>
#include <limits>

using moo::Mat;
using moo::MinNormResult;
using moo::RngState;
using moo::SimplexWeights;
using moo::Vec;

namespace {

Mat random_rows(RngState& rng, int m, int d, double scale = 1.0) {
  Mat G(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = scale * rng.next_gaussian();
  return G;
}

double psi_linearized(const Mat& M, const Vec& lambda, double alpha) {
  return -alpha * (M * lambda).minCoeff();
}

}  // namespace

TEST_CASE("min-norm closed form on orthogonal unit gradients") {
  Mat G(2, 2);
  G << 1, 0, 0, 1;
  const MinNormResult res = moo::min_norm_solve(G);
  CHECK(res.weights[0] == doctest::Approx(0.5));
  CHECK(res.weights[1] == doctest::Approx(0.5));
  CHECK(res.gap == doctest::Approx(std::sqrt(2.0) / 2.0));
}

TEST_CASE("min-norm picks the shorter of collinear gradients") {
  Mat G(2, 3);
  G.row(0) << 1, 2, -1;
  G.row(1) = 2.0 * G.row(0);
  const MinNormResult res = moo::min_norm_solve(G);
  CHECK(res.weights[0] == doctest::Approx(1.0));
  CHECK(res.weights[1] == doctest::Approx(0.0));
  CHECK(res.gap == doctest::Approx(G.row(0).norm()));
}

TEST_CASE("min-norm reaches zero between opposing gradients") {
  Mat G(2, 2);
  G.row(0) << 2, 0;
  G.row(1) << -2, 0;
  const MinNormResult res = moo::min_norm_solve(G);
  CHECK(res.gap <= 1e-12);
  CHECK(res.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("single-task min-norm is the gradient itself") {
  Mat G(1, 4);
  G.row(0) << 1, -1, 2, 0;
  const MinNormResult res = moo::min_norm_solve(G);
  CHECK(res.weights[0] == 1.0);
  CHECK(res.gap == doctest::Approx(G.row(0).norm()));
}

TEST_CASE("min-norm satisfies the descent property on random instances") {
  RngState rng(101);
  for (int m : {2, 3, 5}) {
    for (int t = 0; t < 50; ++t) {
      const Mat G = random_rows(rng, m, 6);
      const MinNormResult res = moo::min_norm_solve(G);
      const Vec dir = G.transpose() * res.weights.values();
      const double dn2 = dir.squaredNorm();
      for (int i = 0; i < m; ++i) CHECK(G.row(i).dot(dir) >= dn2 - 1e-8);
      CHECK(res.gap == doctest::Approx(dir.norm()).epsilon(1e-10));
    }
  }
}

TEST_CASE("min-norm is optimal against random simplex points") {
  RngState rng(103);
  const Mat G = random_rows(rng, 4, 6);
  const MinNormResult res = moo::min_norm_solve(G);
  for (int t = 0; t < 100; ++t) {
    Vec z(4);
    for (int i = 0; i < 4; ++i) z[i] = rng.next_gaussian();
    const SimplexWeights probe = moo::softmax(z);
    CHECK(res.gap <= (G.transpose() * probe.values()).norm() + 1e-8);
  }
}

TEST_CASE("gradient surgery resolves the textbook conflict") {
  Mat G(2, 2);
  G.row(0) << 1, 0;
  G.row(1) << -1, 1;
  RngState rng(7);
  std::vector<double> dots;
  const Mat S = moo::pcgrad_surgery(G, rng, &dots);
  // Row 0 projected off row 1: (1,0) - (-1/2)(-1,1) = (0.5, 0.5).
  CHECK(S(0, 0) == doctest::Approx(0.5));
  CHECK(S(0, 1) == doctest::Approx(0.5));
  // Row 1 projected off row 0: (-1,1) - (-1)(1,0) = (0, 1).
  CHECK(S(1, 0) == doctest::Approx(0.0));
  CHECK(S(1, 1) == doctest::Approx(1.0));
  REQUIRE(dots.size() == 2);
  for (double d : dots) CHECK(std::abs(d) <= 1e-12);

  RngState rng2(7);
  const Vec dir = moo::pcgrad_combine(G, rng2);
  CHECK(dir[0] == doctest::Approx(0.5));
  CHECK(dir[1] == doctest::Approx(1.5));
}

TEST_CASE("gradient surgery annihilates exactly opposite gradients") {
  Mat G(2, 3);
  G.row(0) << 1, -2, 0.5;
  G.row(1) = -G.row(0);
  RngState rng(11);
  const Mat S = moo::pcgrad_surgery(G, rng);
  CHECK(S.row(0).norm() <= 1e-14);
  CHECK(S.row(1).norm() <= 1e-14);
}

TEST_CASE("gradient surgery passes non-conflicting gradients through") {
  Mat G(3, 3);
  G.row(0) << 1, 0, 0;
  G.row(1) << 0, 2, 0;
  G.row(2) << 1, 1, 1;  // positive dot with both others
  RngState rng(13);
  const Mat S = moo::pcgrad_surgery(G, rng);
  CHECK((S - G).norm() == 0.0);
  RngState rng2(13);
  CHECK((moo::pcgrad_combine(G, rng2) -
         (G.row(0) + G.row(1) + G.row(2)).transpose())
            .norm() == 0.0);
}

TEST_CASE("projections never leave a negative dot with the projected-off row") {
  RngState rng(17);
  for (int t = 0; t < 25; ++t) {
    const Mat G = random_rows(rng, 5, 4);
    std::vector<double> dots;
    (void)moo::pcgrad_surgery(G, rng, &dots);
    for (double d : dots) CHECK(d >= -1e-10);
  }
}

TEST_CASE("linearized balancer matches a dense grid for two tasks") {
  RngState rng(19);
  for (int t = 0; t < 10; ++t) {
    const Mat G = random_rows(rng, 2, 5);
    const Mat M = G * G.transpose();
    const double alpha = 0.05;
    const SimplexWeights lam = moo::linearized_decrement_balance(G, alpha);
    const double got = psi_linearized(M, lam.values(), alpha);

    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
      Vec l(2);
      l << i / 1000.0, 1.0 - i / 1000.0;
      best = std::min(best, psi_linearized(M, l, alpha));
    }
    CHECK(got <= best + 1e-2);
  }
}

TEST_CASE("linearized balancer matches a coarse grid for three tasks") {
  RngState rng(23);
  const Mat G = random_rows(rng, 3, 5);
  const Mat M = G * G.transpose();
  const double alpha = 0.05;
  const SimplexWeights lam = moo::linearized_decrement_balance(G, alpha);
  const double got = psi_linearized(M, lam.values(), alpha);

  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100 - i; ++j) {
      Vec l(3);
      l << i / 100.0, j / 100.0, (100 - i - j) / 100.0;
      best = std::min(best, psi_linearized(M, l, alpha));
    }
  }
  CHECK(got <= best + 1e-2);
}

TEST_CASE("linearized balancer keeps the uniform point on symmetric input") {
  Mat G(3, 4);
  G.row(0) << 1, 1, 0, 0;
  G.row(1) = G.row(0);
  G.row(2) = G.row(0);
  const SimplexWeights lam = moo::linearized_decrement_balance(G, 0.05);
  for (int i = 0; i < 3; ++i) CHECK(lam[i] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("loss balancing: uniform, inverse-loss, and random weights") {
  RngState rng(29);
  Vec losses(2);
  losses << 2.0, 1.0;

  const SimplexWeights ls = moo::loss_balance_weights(moo::LossBalanceMethod::kLs, losses, rng);
  CHECK(ls[0] == doctest::Approx(0.5));

  const SimplexWeights si = moo::loss_balance_weights(moo::LossBalanceMethod::kSi, losses, rng);
  CHECK(si[0] == doctest::Approx(1.0 / 3.0));
  CHECK(si[1] == doctest::Approx(2.0 / 3.0));

  Vec bad(2);
  bad << 0.0, 1.0;
  CHECK_THROWS_AS(moo::loss_balance_weights(moo::LossBalanceMethod::kSi, bad, rng),
                  std::domain_error);

  RngState r1(31), r2(31);
  const SimplexWeights a = moo::loss_balance_weights(moo::LossBalanceMethod::kRlw, losses, r1);
  const SimplexWeights b = moo::loss_balance_weights(moo::LossBalanceMethod::kRlw, losses, r2);
  CHECK((a.values() - b.values()).norm() == 0.0);  // same stream, same draw
  const SimplexWeights c = moo::loss_balance_weights(moo::LossBalanceMethod::kRlw, losses, r1);
  CHECK((a.values() - c.values()).norm() > 0.0);  // stream advanced
}

TEST_CASE("balance dispatch returns the advertised outputs") {
  RngState rng(37);
  const Mat G = random_rows(rng, 3, 4);
  Vec losses(3);
  losses << 1.0, 2.0, 3.0;

  CHECK_THROWS_AS(moo::balance(moo::BalancerKind::kMarigold, G, losses, 0.05, rng),
                  std::invalid_argument);

  const moo::BalancerOutput mgda = moo::balance(moo::BalancerKind::kMgda, G, losses, 0.05, rng);
  REQUIRE(mgda.weights.has_value());
  REQUIRE(mgda.direction.has_value());
  CHECK(mgda.gradient_evals == 3);
  CHECK((*mgda.direction - G.transpose() * mgda.weights->values()).norm() <= 1e-12);

  const moo::BalancerOutput pc = moo::balance(moo::BalancerKind::kPcgrad, G, losses, 0.05, rng);
  CHECK_FALSE(pc.weights.has_value());
  REQUIRE(pc.direction.has_value());
  CHECK(pc.gradient_evals == 3);

  const moo::BalancerOutput lin =
      moo::balance(moo::BalancerKind::kLinearized, G, losses, 0.05, rng);
  REQUIRE(lin.weights.has_value());
  REQUIRE(lin.direction.has_value());
  CHECK(lin.gradient_evals == 3);

  for (moo::BalancerKind kind :
       {moo::BalancerKind::kLs, moo::BalancerKind::kSi, moo::BalancerKind::kRlw}) {
    const moo::BalancerOutput out = moo::balance(kind, Mat(), losses, 0.05, rng);
    REQUIRE(out.weights.has_value());
    CHECK_FALSE(out.direction.has_value());
    CHECK(out.gradient_evals == 0);
  }
}
