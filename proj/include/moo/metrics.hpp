#pragma once

#include "moo/core_math.hpp"

#include <string>
#include <vector>

namespace moo {

enum class Direction { kHigherBetter, kLowerBetter };

struct MetricSpec {
  std::string name;
  Direction direction = Direction::kLowerBetter;
};

// Pareto stationarity gap: min over the simplex of the norm of the convex
// combination of task gradients (rows of G). Zero iff no common descent
// direction exists for the linearized criterion.
double pareto_stationarity_gap(const Mat& G);

// Mean signed relative degradation of `method_metrics` against
// `base_metrics`, in percent: (100/m) * sum_i (-1)^{delta_i} (M_k - M_b)/M_b
// with delta_i = 1 for higher-better metrics. Lower is better.
double delta_k(const Vec& method_metrics, const Vec& base_metrics,
               const std::vector<MetricSpec>& specs);

// Per-method average rank over the metric columns of `table`
// (methods x metrics, rank 1 = best, ties share the average rank).
Vec mean_rank(const Mat& table, const std::vector<MetricSpec>& specs);

// One logged trajectory row.
struct RunRecordRow {
  long iter = 0;
  Vec losses;
  Vec lambda;
  Vec rho;
  double stat_gap = 0.0;
  double decrement = 0.0;
  long weighted_gevals = 0;  // cumulative
  long pertask_gevals = 0;   // cumulative
  double elapsed_ms = 0.0;
};

struct RunRecord {
  int m = 0;
  std::vector<RunRecordRow> rows;
  bool aborted = false;     // numeric blow-up before finishing
  long aborted_iter = -1;
};

}  // namespace moo
