#include "moo/metrics.hpp"

#include "moo/balancers.hpp"

#include <cmath>
#include <stdexcept>

namespace moo {

double pareto_stationarity_gap(const Mat& G) {
  return min_norm_solve(G).gap;
}

double delta_k(const Vec& method_metrics, const Vec& base_metrics,
               const std::vector<MetricSpec>& specs) {
  const int m = static_cast<int>(specs.size());
  if (m == 0) throw std::invalid_argument("delta_k: no metrics");
  if (method_metrics.size() != m || base_metrics.size() != m)
    throw std::invalid_argument("delta_k: metric vector length mismatch");
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(method_metrics[i]) || !std::isfinite(base_metrics[i]))
      throw std::invalid_argument("delta_k: non-finite metric");
    if (base_metrics[i] == 0.0) throw std::domain_error("delta_k: zero base metric");
    const double rel = (method_metrics[i] - base_metrics[i]) / base_metrics[i];
    acc += specs[i].direction == Direction::kHigherBetter ? -rel : rel;
  }
  return 100.0 * acc / static_cast<double>(m);
}

Vec mean_rank(const Mat& table, const std::vector<MetricSpec>& specs) {
  const int n_methods = static_cast<int>(table.rows());
  const int n_metrics = static_cast<int>(table.cols());
  if (n_methods < 2) throw std::invalid_argument("mean_rank: need at least 2 methods");
  if (static_cast<int>(specs.size()) != n_metrics)
    throw std::invalid_argument("mean_rank: spec count mismatch");
  if (!table.allFinite()) throw std::invalid_argument("mean_rank: non-finite entry");

  Vec out = Vec::Zero(n_methods);
  for (int j = 0; j < n_metrics; ++j) {
    const bool higher = specs[j].direction == Direction::kHigherBetter;
    for (int i = 0; i < n_methods; ++i) {
      // rank = 1 + #strictly better + (#ties with others)/2  (average-tie rule)
      int better = 0, ties = 0;
      for (int k = 0; k < n_methods; ++k) {
        if (k == i) continue;
        const double a = table(i, j), b = table(k, j);
        if (b == a) ++ties;
        else if (higher ? (b > a) : (b < a)) ++better;
      }
      out[i] += 1.0 + better + 0.5 * ties;
    }
  }
  return out / static_cast<double>(n_metrics);
}

}  // namespace moo
