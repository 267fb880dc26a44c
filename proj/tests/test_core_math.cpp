#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "moo/core_math.hpp"

#include <cmath>
#include <set>

using moo::RngState;
using moo::SimplexWeights;
using moo::Vec;

TEST_CASE("rng streams are deterministic and split streams diverge") {
  RngState a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngState parent(42);
  RngState child = parent.split();
  // The child stream must not replay the parent's continuation.
  RngState parent2(42);
  (void)parent2.next_u64();  // parent consumed one draw to create the child
  bool all_equal = true;
  RngState child_copy = child;
  for (int i = 0; i < 16; ++i)
    all_equal = all_equal && (child_copy.next_u64() == parent2.next_u64());
  CHECK_FALSE(all_equal);
}

TEST_CASE("uniform draws lie in (0, 1] and gaussians look standard") {
  RngState rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
  double sum = 0.0, sumsq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    REQUIRE(std::isfinite(g));
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);        // ~6 standard errors
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("sphere samples are unit vectors; n = 1 gives signs") {
  RngState rng(11);
  for (int n : {1, 2, 5, 16}) {
    for (int i = 0; i < 200; ++i) {
      const Vec v = moo::sample_unit_sphere(rng, n);
      REQUIRE(v.size() == n);
      CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
    }
  }
  bool saw_plus = false, saw_minus = false;
  for (int i = 0; i < 100; ++i) {
    const double s = moo::sample_unit_sphere(rng, 1)[0];
    CHECK((s == 1.0 || s == -1.0));
    saw_plus = saw_plus || s > 0;
    saw_minus = saw_minus || s < 0;
  }
  CHECK(saw_plus);
  CHECK(saw_minus);
}

TEST_CASE("sphere samples are unbiased per coordinate") {
  RngState rng(13);
  const int n = 4;
  Vec mean = Vec::Zero(n);
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) mean += moo::sample_unit_sphere(rng, n);
  mean /= samples;
  for (int j = 0; j < n; ++j) CHECK(std::abs(mean[j]) < 0.02);
}

TEST_CASE("ball samples stay inside and match the n/(n+2) moment") {
  RngState rng(17);
  const int n = 2;
  double sumsq = 0.0;
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) {
    const Vec v = moo::sample_unit_ball(rng, n);
    REQUIRE(v.size() == n);
    CHECK(v.norm() <= 1.0 + 1e-12);
    sumsq += v.squaredNorm();
  }
  // E||v||^2 = n/(n+2) = 1/2 for n = 2.
  CHECK(sumsq / samples == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("softmax handles flat, known, and extreme logits") {
  {
    const SimplexWeights w = moo::softmax(Vec::Zero(4));
    for (int i = 0; i < 4; ++i) CHECK(w[i] == doctest::Approx(0.25));
  }
  {
    Vec z(2);
    z << std::log(2.0), 0.0;
    const SimplexWeights w = moo::softmax(z);
    CHECK(w[0] == doctest::Approx(2.0 / 3.0));
    CHECK(w[1] == doctest::Approx(1.0 / 3.0));
  }
  {
    Vec z(2);
    z << 1e6, 0.0;  // must not overflow thanks to max subtraction
    const SimplexWeights w = moo::softmax(z);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(0.0));
  }
  CHECK_THROWS_AS(moo::softmax(Vec()), std::invalid_argument);
  Vec bad(2);
  bad << 1.0, std::nan("");
  CHECK_THROWS_AS(moo::softmax(bad), std::invalid_argument);
}

TEST_CASE("simplex weights validate their invariants") {
  Vec ok(3);
  ok << 0.2, 0.3, 0.5;
  const SimplexWeights w(ok);
  CHECK(w.size() == 3);
  CHECK(w[2] == 0.5);

  Vec negative(2);
  negative << -0.1, 1.1;
  CHECK_THROWS_AS(SimplexWeights{negative}, std::invalid_argument);
  Vec off_sum(2);
  off_sum << 0.6, 0.6;
  CHECK_THROWS_AS(SimplexWeights{off_sum}, std::invalid_argument);
  CHECK_THROWS_AS(SimplexWeights{Vec()}, std::invalid_argument);

  const SimplexWeights u = SimplexWeights::uniform(5);
  for (int i = 0; i < 5; ++i) CHECK(u[i] == doctest::Approx(0.2));
  const SimplexWeights e1 = SimplexWeights::unit(3, 1);
  CHECK(e1[0] == 0.0);
  CHECK(e1[1] == 1.0);
  CHECK(e1[2] == 0.0);
}

TEST_CASE("simplex projection is exact on knowns and idempotent") {
  {
    Vec x(2);
    x << 2.0, 0.0;
    const Vec p = moo::project_to_simplex(x);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.0));
  }
  {
    Vec x(3);
    x << 0.2, 0.3, 0.5;  // already feasible
    const Vec p = moo::project_to_simplex(x);
    for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(x[i]));
  }
  RngState rng(23);
  for (int t = 0; t < 50; ++t) {
    Vec x(4);
    for (int i = 0; i < 4; ++i) x[i] = 3.0 * rng.next_gaussian();
    const Vec p = moo::project_to_simplex(x);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    const Vec pp = moo::project_to_simplex(p);
    CHECK((pp - p).norm() <= 1e-12);
    // Projection property: p must be at least as close to x as any vertex.
    for (int i = 0; i < 4; ++i) {
      Vec vertex = Vec::Zero(4);
      vertex[i] = 1.0;
      CHECK((x - p).norm() <= (x - vertex).norm() + 1e-12);
    }
  }
}

TEST_CASE("single-point estimate on a linear function") {
  // f(x) = 3 x1 - x2, query at the origin, r = 0.1, v = (1, 0):
  // (d/r) f(r v) v = (2/0.1)(0.3)(1, 0) = (6, 0).
  moo::ScalarFn f = [](const Vec& x) { return 3.0 * x[0] - x[1]; };
  Vec v(2);
  v << 1.0, 0.0;
  const Vec est = moo::zo_gradient_estimate(f, Vec::Zero(2), 0.1, v);
  CHECK(est[0] == doctest::Approx(6.0));
  CHECK(est[1] == doctest::Approx(0.0));
}

TEST_CASE("antithetic pairing cancels the constant term exactly") {
  moo::ScalarFn constant = [](const Vec&) { return 5.0; };
  Vec v(3);
  v << 0.0, 1.0, 0.0;
  const Vec single = moo::zo_gradient_estimate(constant, Vec::Zero(3), 0.01, v);
  CHECK(single.norm() > 100.0);  // (d/r) * 5 along v
  const Vec anti = moo::zo_gradient_estimate_antithetic(constant, Vec::Zero(3), 0.01, v);
  CHECK(anti.norm() == 0.0);
}

TEST_CASE("sphere-averaged estimates recover a linear gradient") {
  moo::ScalarFn f = [](const Vec& x) { return 3.0 * x[0] - x[1] + 0.5; };
  Vec x0(2);
  x0 << 0.4, -0.2;
  RngState rng(29);
  const int n = 20000;
  Vec mean = Vec::Zero(2);
  for (int i = 0; i < n; ++i) {
    const Vec v = moo::sample_unit_sphere(rng, 2);
    mean += moo::zo_gradient_estimate_antithetic(f, x0, 0.1, v);
  }
  mean /= n;
  CHECK(mean[0] == doctest::Approx(3.0).epsilon(0.02));
  CHECK(mean[1] == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("ball smoothing obeys the quadratic bias bound") {
  // f(x) = ||x||^2 has curvature bound 2; at the origin the smoothed
  // value is r^2 n/(n+2) = 0.005 for n = 2, r = 0.1.
  moo::ScalarFn f = [](const Vec& x) { return x.squaredNorm(); };
  RngState rng(31);
  const double r = 0.1;
  const double smoothed = moo::smoothed_value_mc(f, Vec::Zero(2), r, 100000, rng);
  CHECK(smoothed == doctest::Approx(0.005).epsilon(0.03));
  CHECK(std::abs(smoothed - 0.0) <= 2.0 * r * r / 2.0);
}

TEST_CASE("estimator preconditions are enforced") {
  moo::ScalarFn f = [](const Vec& x) { return x.sum(); };
  Vec unit(2);
  unit << 1.0, 0.0;
  CHECK_THROWS_AS(moo::zo_gradient_estimate(f, Vec::Zero(2), 0.0, unit),
                  std::invalid_argument);
  CHECK_THROWS_AS(moo::zo_gradient_estimate(f, Vec::Zero(2), -0.1, unit),
                  std::invalid_argument);
  Vec not_unit(2);
  not_unit << 0.5, 0.5;
  CHECK_THROWS_AS(moo::zo_gradient_estimate(f, Vec::Zero(2), 0.1, not_unit),
                  std::invalid_argument);
  Vec wrong_dim(3);
  wrong_dim << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(moo::zo_gradient_estimate(f, Vec::Zero(2), 0.1, wrong_dim),
                  std::invalid_argument);
}
