#pragma once

#include "moo/balancers.hpp"
#include "moo/marigold.hpp"
#include "moo/optimizers.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace moo {

// Raised for malformed or invalid configuration; the message carries
// "path:line:" when a specific line is at fault.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ProblemType { kQuadratic, kMlp, kAux };
enum class QuadraticKind { kIdentity, kSpd };

// Fully validated run configuration. Flat `key = value` file with sections
// [problem], [optimizer], [marigold], [run]; unknown or duplicate keys are
// rejected with line-precise errors.
struct RunConfig {
  // [problem]
  ProblemType problem = ProblemType::kQuadratic;
  int m = 2;
  int d = 2;
  std::uint64_t gen_seed = 12345;
  QuadraticKind quad_kind = QuadraticKind::kIdentity;
  double center_scale = 1.0;
  double eig_min = 0.5;
  double eig_max = 2.0;
  int input_dim = 3;
  std::vector<int> shared_widths = {8};
  std::vector<int> head_hidden;  // applied to every task head
  int pool_size = 64;
  double noise_scale = 0.05;
  int n_main = 3;
  int target_index = 0;
  bool aligned_aux = true;
  double theta0_scale = 1.0;

  // [optimizer]
  OptimizerState::Kind opt_kind = OptimizerState::Kind::kAdam;
  double alpha = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  // [marigold]
  double beta = 1.0;
  double r = 1e-3;
  double upper_lr_u = 1e-4;
  double upper_lr_v = 1e-4;
  PerturbMode perturb_mode = PerturbMode::kLogit;
  BatchPolicy batch_policy = BatchPolicy::kReuse;
  UpdateSchedule update_schedule = UpdateSchedule::kSimultaneous;
  double aux_r = 0.1;
  double aux_lr = 1e-2;
  bool aux_learn_omega = true;
  double aux_omega0 = 0.0;

  // [run]
  std::vector<BalancerKind> balancers = {BalancerKind::kMarigold};
  long iterations = 1000;
  int batch_size = 0;  // 0 = full batch
  std::vector<std::uint64_t> seeds = {0};
  long log_stride = 1;
  std::string out_dir;          // empty -> $MOOBENCH_OUT or ./out
  bool timing = false;          // off keeps elapsed_ms at 0 for byte-identical reruns
  std::string delta_baseline;   // empty -> first listed balancer
};

RunConfig parse_config(const std::string& path);

// Parse from an in-memory string; `origin` labels error messages.
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// Cross-field validation (also called by the parsers).
void validate_config(const RunConfig& config);

std::string balancer_name(BalancerKind kind);
BalancerKind balancer_from_name(const std::string& name);

}  // namespace moo
