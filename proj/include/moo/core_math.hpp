#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

namespace moo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;  // row-major semantics: row i of an m-by-d matrix is task i's gradient

// Deterministic counter-based generator (splitmix64 core). Identical seed and
// call sequence give a bit-identical stream; split() derives an independent,
// reproducible substream. Single-owner: never share one instance across
// concurrent consumers — split up front instead.
class RngState {
 public:
  explicit RngState(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double next_uniform();

  // Standard normal via Box-Muller on fresh uniform pairs (no cached spare,
  // so the draw count per gaussian is fixed and replay is exact).
  double next_gaussian();

  // Independent substream; advances this stream by one draw.
  RngState split() { return RngState(next_u64()); }

 private:
  std::uint64_t state_;
};

// Task-weight vector living on the probability simplex: entries >= 0 and
// |sum - 1| <= 1e-9, validated at construction.
class SimplexWeights {
 public:
  explicit SimplexWeights(Vec values);

  static SimplexWeights uniform(int m);
  static SimplexWeights unit(int m, int index);  // one-hot at `index`

  const Vec& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }

 private:
  Vec values_;
};

// Uniform draw on the unit sphere S_{n-1} (normalized gaussian vector).
Vec sample_unit_sphere(RngState& rng, int n);

// Uniform draw in the closed unit ball B_n (sphere sample scaled by U^{1/n}).
Vec sample_unit_ball(RngState& rng, int n);

// Max-subtracted softmax; finite for arbitrarily large logits.
SimplexWeights softmax(const Vec& logits);

// Euclidean projection onto the probability simplex.
Vec project_to_simplex(const Vec& x);

using ScalarFn = std::function<double(const Vec&)>;

// Single-point zeroth-order gradient estimate (d/r) * f(x + r*v) * v for a
// unit direction v. Averaged over v uniform on the sphere it estimates the
// gradient of the ball-smoothed function f_r.
Vec zo_gradient_estimate(const ScalarFn& f_eval, const Vec& x, double r, const Vec& v);

// Antithetic-paired variant: mean of the estimates at +v and -v. Same
// expectation as the single-point form; direction-constant terms cancel.
// Optional variance-reduction helper, not used by the training loop.
Vec zo_gradient_estimate_antithetic(const ScalarFn& f_eval, const Vec& x, double r, const Vec& v);

// Monte Carlo estimate of the ball-smoothed value f_r(x) = E[f(x + r*u)],
// u uniform in the unit ball. Test oracle for the smoothing bias bounds.
double smoothed_value_mc(const ScalarFn& f_eval, const Vec& x, double r, long n_samples,
                         RngState& rng);

}  // namespace moo
