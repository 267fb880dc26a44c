#include "moo/balancers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace moo {

namespace {

void check_finite(const Mat& G, const char* who) {
  if (!G.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

SimplexWeights to_simplex(Vec lambda) {
  lambda = lambda.cwiseMax(0.0);
  double s = lambda.sum();
  if (s <= 0.0) return SimplexWeights::uniform(static_cast<int>(lambda.size()));
  return SimplexWeights(lambda / s);
}

}  // namespace

MinNormResult min_norm_solve(const Mat& G) {
  const int m = static_cast<int>(G.rows());
  if (m < 1) throw std::invalid_argument("min_norm_solve: need at least one row");
  check_finite(G, "min_norm_solve");

  if (m == 1) return {SimplexWeights::unit(1, 0), G.row(0).norm()};

  const Mat M = G * G.transpose();  // Gram matrix; ||G' lambda||^2 = lambda' M lambda

  if (m == 2) {
    // Closed form: lambda_1 = <g2 - g1, g2> / ||g1 - g2||^2, clipped to [0, 1].
    const double denom = M(0, 0) - 2.0 * M(0, 1) + M(1, 1);
    Vec lambda(2);
    if (denom <= 1e-30) {
      lambda << 0.5, 0.5;  // identical rows: objective flat, tie-break to uniform
    } else {
      const double l1 = std::clamp((M(1, 1) - M(0, 1)) / denom, 0.0, 1.0);
      lambda << l1, 1.0 - l1;
    }
    const double gap = std::sqrt(std::max(0.0, lambda.dot(M * lambda)));
    return {SimplexWeights(lambda), gap};
  }

  // Fully corrective Frank-Wolfe on f(lambda) = 0.5 lambda' M lambda: each
  // outer step adds the linear-oracle vertex to the active set, then an inner
  // cycle alternates exact affine minimization over the active set with a
  // line search to the boundary, dropping coordinates that reach zero. On a
  // quadratic this terminates in finitely many outer steps, so the duality
  // gap reaches the tolerance long before the iteration cap. The gap at exit
  // bounds the worst-case violation of the min-norm descent property, which
  // is why the tolerance sits two decades below the asserted slack.
  Vec lambda = Vec::Constant(m, 1.0 / m);
  std::vector<int> active(m);
  for (int i = 0; i < m; ++i) active[i] = i;

  // Exact minimizer of 0.5 x'M_S x over the affine hull of the active
  // vertices (sum x = 1, sign-free), via the bordered KKT system. A
  // complete orthogonal decomposition keeps rank-deficient Gram blocks
  // (collinear gradients, m > d) well-defined and deterministic.
  const auto affine_minimizer = [&M](const std::vector<int>& S) -> Vec {
    const int n = static_cast<int>(S.size());
    Mat kkt = Mat::Zero(n + 1, n + 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) kkt(i, j) = M(S[i], S[j]);
    kkt.row(n).head(n).setOnes();
    kkt.col(n).head(n).setOnes();
    Vec rhs = Vec::Zero(n + 1);
    rhs[n] = 1.0;
    Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    Vec x = sol.head(n);
    const double s = x.sum();
    if (std::abs(s - 1.0) > 1e-8 && std::abs(s) > 1e-12) x /= s;
    return x;
  };

  for (int iter = 0; iter < 500; ++iter) {
    const Vec grad = M * lambda;
    int s = 0;
    for (int i = 1; i < m; ++i)
      if (grad[i] < grad[s]) s = i;
    const double fw_gap = lambda.dot(grad) - grad[s];
    if (fw_gap <= 1e-10) break;
    if (std::find(active.begin(), active.end(), s) == active.end())
      active.push_back(s);

    // Inner correction: move toward the affine minimizer, clipping at the
    // boundary of the face and pruning dropped vertices, until the affine
    // minimizer itself is feasible. Each pass removes a vertex, so this
    // cycles at most |active| times.
    for (int pass = 0; pass < m + 1 && active.size() > 1; ++pass) {
      const int n = static_cast<int>(active.size());
      const Vec x = affine_minimizer(active);
      if (x.minCoeff() >= -1e-12) {
        lambda.setZero();
        for (int i = 0; i < n; ++i) lambda[active[i]] = std::max(x[i], 0.0);
        lambda /= lambda.sum();
        break;
      }
      double theta = 1.0;
      for (int i = 0; i < n; ++i) {
        const double cur = lambda[active[i]];
        if (x[i] < cur)
          theta = std::min(theta, cur / std::max(cur - x[i], 1e-300));
      }
      Vec next = Vec::Zero(m);
      for (int i = 0; i < n; ++i) {
        const double v = (1.0 - theta) * lambda[active[i]] + theta * x[i];
        next[active[i]] = v > 1e-14 ? v : 0.0;
      }
      lambda = next / next.sum();
      std::vector<int> kept;
      kept.reserve(active.size());
      for (int idx : active)
        if (lambda[idx] > 0.0) kept.push_back(idx);
      if (kept.empty()) kept.push_back(active.front());
      active = std::move(kept);
    }
  }
  const double gap = std::sqrt(std::max(0.0, lambda.dot(M * lambda)));
  return {to_simplex(lambda), gap};
}

Mat pcgrad_surgery(const Mat& G, RngState& rng, std::vector<double>* post_projection_dots) {
  const int m = static_cast<int>(G.rows());
  if (m < 2) throw std::invalid_argument("pcgrad_surgery: need at least 2 tasks");
  check_finite(G, "pcgrad_surgery");

  Mat out = G;
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) {
    // Fresh random order over the other tasks for each row.
    int k = 0;
    for (int j = 0; j < m; ++j)
      if (j != i) order[k++] = j;
    for (int j = k - 1; j > 0; --j) {
      int p = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(j + 1));
      std::swap(order[j], order[p]);
    }
    for (int oi = 0; oi < k; ++oi) {
      const int j = order[oi];
      const double dot = out.row(i).dot(G.row(j));
      const double nj = G.row(j).squaredNorm();
      if (dot < 0.0 && nj > 0.0) {
        out.row(i) -= (dot / nj) * G.row(j);
        if (post_projection_dots) post_projection_dots->push_back(out.row(i).dot(G.row(j)));
      }
    }
  }
  return out;
}

Vec pcgrad_combine(const Mat& G, RngState& rng) {
  return pcgrad_surgery(G, rng).colwise().sum().transpose();
}

SimplexWeights linearized_decrement_balance(const Mat& G, double alpha) {
  const int m = static_cast<int>(G.rows());
  if (m < 2) throw std::invalid_argument("linearized_decrement_balance: need at least 2 tasks");
  if (!(alpha > 0.0)) throw std::invalid_argument("linearized_decrement_balance: alpha must be > 0");
  check_finite(G, "linearized_decrement_balance");

  const Mat M = G * G.transpose();

  // The minimizer of min_l max_r -alpha r'M l does not depend on the positive
  // factor alpha, so the saddle solve runs on the alpha-free payoff r'(-M l).
  // This keeps the fixed step schedule equally effective whatever the
  // caller's step size; with alpha folded into the gradients, small alpha
  // would shrink every update 20-fold or more and the iterates could not
  // cross the simplex within the iteration budget.
  const auto game = [&](const Vec& lam) { return -(M * lam).minCoeff(); };

  Vec lambda = Vec::Constant(m, 1.0 / m);
  Vec rho = Vec::Constant(m, 1.0 / m);
  Vec best = lambda;
  double best_val = game(lambda);
  Vec weighted_sum = Vec::Zero(m);
  double weight_total = 0.0;
  for (int k = 1; k <= 2000; ++k) {
    const double step = 0.05 / std::sqrt(static_cast<double>(k));
    lambda = project_to_simplex(lambda + step * (M * rho));  // descent on -r'M l
    rho = project_to_simplex(rho - step * (M * lambda));     // ascent
    const double val = game(lambda);
    if (val < best_val) {  // strict improvement only; ties keep the earlier (uniform) point
      best_val = val;
      best = lambda;
    }
    weighted_sum += step * lambda;
    weight_total += step;
  }

  // The exact inner maximum is cheap, so screen a few deterministic
  // candidates that are often closer to the saddle than any single iterate:
  // the step-weighted trajectory average (the point the classic saddle
  // guarantee speaks about) and the simplex vertices.
  const Vec average = weighted_sum / weight_total;
  if (game(average) < best_val) {
    best_val = game(average);
    best = average;
  }
  for (int i = 0; i < m; ++i) {
    Vec vertex = Vec::Zero(m);
    vertex[i] = 1.0;
    if (game(vertex) < best_val) {
      best_val = game(vertex);
      best = vertex;
    }
  }
  return to_simplex(best);
}

SimplexWeights loss_balance_weights(LossBalanceMethod method, const Vec& losses, RngState& rng) {
  const int m = static_cast<int>(losses.size());
  if (m < 1) throw std::invalid_argument("loss_balance_weights: empty losses");
  switch (method) {
    case LossBalanceMethod::kLs:
      return SimplexWeights::uniform(m);
    case LossBalanceMethod::kSi: {
      Vec inv(m);
      for (int i = 0; i < m; ++i) {
        if (!(losses[i] > 0.0))
          throw std::domain_error("loss_balance_weights: SI needs strictly positive losses");
        inv[i] = 1.0 / losses[i];
      }
      return SimplexWeights(inv / inv.sum());
    }
    case LossBalanceMethod::kRlw: {
      Vec draws(m);
      for (int i = 0; i < m; ++i) draws[i] = rng.next_gaussian();
      return softmax(draws);
    }
  }
  throw std::logic_error("loss_balance_weights: unreachable");
}

BalancerOutput balance(BalancerKind kind, const Mat& G, const Vec& losses, double alpha,
                       RngState& rng) {
  BalancerOutput out;
  switch (kind) {
    case BalancerKind::kMarigold:
      throw std::invalid_argument("balance: marigold runs through marigold_step, not balance()");
    case BalancerKind::kMgda: {
      MinNormResult res = min_norm_solve(G);
      out.direction = G.transpose() * res.weights.values();
      out.weights = std::move(res.weights);
      out.gradient_evals = G.rows();
      return out;
    }
    case BalancerKind::kPcgrad:
      out.direction = pcgrad_combine(G, rng);
      out.gradient_evals = G.rows();
      return out;
    case BalancerKind::kLinearized: {
      SimplexWeights w = linearized_decrement_balance(G, alpha);
      out.direction = G.transpose() * w.values();
      out.weights = std::move(w);
      out.gradient_evals = G.rows();
      return out;
    }
    case BalancerKind::kLs:
      out.weights = loss_balance_weights(LossBalanceMethod::kLs, losses, rng);
      return out;
    case BalancerKind::kSi:
      out.weights = loss_balance_weights(LossBalanceMethod::kSi, losses, rng);
      return out;
    case BalancerKind::kRlw:
      out.weights = loss_balance_weights(LossBalanceMethod::kRlw, losses, rng);
      return out;
  }
  throw std::logic_error("balance: unreachable");
}

}  // namespace moo
