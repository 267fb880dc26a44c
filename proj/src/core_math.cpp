#include "moo/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace moo {

std::uint64_t RngState::next_u64() {
  // splitmix64 (Steele et al.): Weyl-sequence counter + bijective finalizer.
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RngState::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::next_gaussian() {
  // u1 in (0, 1] so the log is finite.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SimplexWeights::SimplexWeights(Vec values) : values_(std::move(values)) {
  if (values_.size() == 0) throw std::invalid_argument("SimplexWeights: empty vector");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    double w = values_[i];
    if (!std::isfinite(w)) throw std::invalid_argument("SimplexWeights: non-finite entry");
    if (w < 0.0) throw std::invalid_argument("SimplexWeights: negative entry");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("SimplexWeights: entries must sum to 1");
}

SimplexWeights SimplexWeights::uniform(int m) {
  if (m < 1) throw std::invalid_argument("SimplexWeights::uniform: m must be >= 1");
  return SimplexWeights(Vec::Constant(m, 1.0 / m));
}

SimplexWeights SimplexWeights::unit(int m, int index) {
  if (m < 1 || index < 0 || index >= m) throw std::invalid_argument("SimplexWeights::unit: bad index");
  Vec v = Vec::Zero(m);
  v[index] = 1.0;
  return SimplexWeights(std::move(v));
}

Vec sample_unit_sphere(RngState& rng, int n) {
  if (n < 1) throw std::invalid_argument("sample_unit_sphere: dimension must be >= 1");
  Vec v(n);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < n; ++i) v[i] = rng.next_gaussian();
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);  // astronomically unlikely; redraw keeps the output well-defined
  return v / std::sqrt(norm2);
}

Vec sample_unit_ball(RngState& rng, int n) {
  if (n < 1) throw std::invalid_argument("sample_unit_ball: dimension must be >= 1");
  Vec v = sample_unit_sphere(rng, n);
  double u = rng.next_uniform();
  return v * std::pow(u, 1.0 / n);
}

SimplexWeights softmax(const Vec& logits) {
  if (logits.size() == 0) throw std::invalid_argument("softmax: empty input");
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (std::isnan(logits[i])) throw std::invalid_argument("softmax: NaN input");
  }
  double mx = logits.maxCoeff();
  Vec e = (logits.array() - mx).exp();
  return SimplexWeights(e / e.sum());
}

Vec project_to_simplex(const Vec& x) {
  // Sort-based Euclidean projection (Held-Wolfe-Crowder).
  const Eigen::Index n = x.size();
  if (n == 0) throw std::invalid_argument("project_to_simplex: empty input");
  std::vector<double> u(x.data(), x.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0, tau = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cssv += u[i];
    double t = (cssv - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = std::max(x[i] - tau, 0.0);
  // Guard against accumulated rounding before SimplexWeights validation.
  double s = out.sum();
  if (s <= 0.0) return Vec::Constant(n, 1.0 / static_cast<double>(n));
  if (std::abs(s - 1.0) > 1e-12) out /= s;
  return out;
}

namespace {
void check_zo_args(const Vec& x, double r, const Vec& v) {
  if (r <= 0.0) throw std::invalid_argument("zo_gradient_estimate: r must be > 0");
  if (v.size() != x.size()) throw std::invalid_argument("zo_gradient_estimate: dimension mismatch");
  if (std::abs(v.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("zo_gradient_estimate: direction must be unit norm");
}
}  // namespace

Vec zo_gradient_estimate(const ScalarFn& f_eval, const Vec& x, double r, const Vec& v) {
  check_zo_args(x, r, v);
  const double d = static_cast<double>(x.size());
  return (d / r) * f_eval(x + r * v) * v;
}

Vec zo_gradient_estimate_antithetic(const ScalarFn& f_eval, const Vec& x, double r, const Vec& v) {
  check_zo_args(x, r, v);
  const double d = static_cast<double>(x.size());
  return (d / (2.0 * r)) * (f_eval(x + r * v) - f_eval(x - r * v)) * v;
}

double smoothed_value_mc(const ScalarFn& f_eval, const Vec& x, double r, long n_samples,
                         RngState& rng) {
  if (r <= 0.0) throw std::invalid_argument("smoothed_value_mc: r must be > 0");
  if (n_samples < 1) throw std::invalid_argument("smoothed_value_mc: n_samples must be >= 1");
  const int n = static_cast<int>(x.size());
  double acc = 0.0;
  for (long s = 0; s < n_samples; ++s) acc += f_eval(x + r * sample_unit_ball(rng, n));
  return acc / static_cast<double>(n_samples);
}

}  // namespace moo
