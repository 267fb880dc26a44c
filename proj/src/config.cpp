#include "moo/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace moo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw ConfigError(os.str());
}

double parse_double(const std::string& origin, int line, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(origin, line, "key '" + key + "': expected a number, got '" + value + "'");
  }
}

long parse_long(const std::string& origin, int line, const std::string& key,
                const std::string& value) {
  try {
    std::size_t pos = 0;
    long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    fail(origin, line, "key '" + key + "': expected an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& origin, int line, const std::string& key,
                        const std::string& value) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size() || (!value.empty() && value[0] == '-')) throw std::invalid_argument("");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    fail(origin, line, "key '" + key + "': expected an unsigned integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& origin, int line, const std::string& key,
                const std::string& value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  fail(origin, line, "key '" + key + "': expected true/false/on/off, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::string balancer_name(BalancerKind kind) {
  switch (kind) {
    case BalancerKind::kMarigold: return "marigold";
    case BalancerKind::kMgda: return "mgda";
    case BalancerKind::kPcgrad: return "pcgrad";
    case BalancerKind::kLinearized: return "linearized";
    case BalancerKind::kLs: return "ls";
    case BalancerKind::kSi: return "si";
    case BalancerKind::kRlw: return "rlw";
  }
  throw std::logic_error("balancer_name: unreachable");
}

BalancerKind balancer_from_name(const std::string& name) {
  if (name == "marigold") return BalancerKind::kMarigold;
  if (name == "mgda") return BalancerKind::kMgda;
  if (name == "pcgrad") return BalancerKind::kPcgrad;
  if (name == "linearized") return BalancerKind::kLinearized;
  if (name == "ls") return BalancerKind::kLs;
  if (name == "si") return BalancerKind::kSi;
  if (name == "rlw") return BalancerKind::kRlw;
  throw ConfigError("unknown balancer '" + name + "'");
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;  // "section.key" for duplicate detection
  int line_no = 0;

  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "optimizer" && section != "marigold" &&
          section != "run")
        fail(origin, line_no, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");
    if (section.empty()) fail(origin, line_no, "key '" + key + "' appears before any section");
    if (!seen.insert(section + "." + key).second)
      fail(origin, line_no, "duplicate key '" + key + "' in [" + section + "]");

    auto num = [&](const char* k) { return parse_double(origin, line_no, k, value); };
    auto integer = [&](const char* k) { return parse_long(origin, line_no, k, value); };

    if (section == "problem") {
      if (key == "type") {
        if (value == "quadratic") cfg.problem = ProblemType::kQuadratic;
        else if (value == "mlp") cfg.problem = ProblemType::kMlp;
        else if (value == "aux") cfg.problem = ProblemType::kAux;
        else fail(origin, line_no, "key 'type': expected quadratic/mlp/aux, got '" + value + "'");
      } else if (key == "m") cfg.m = static_cast<int>(integer("m"));
      else if (key == "d") cfg.d = static_cast<int>(integer("d"));
      else if (key == "gen_seed") cfg.gen_seed = parse_u64(origin, line_no, "gen_seed", value);
      else if (key == "quad_kind") {
        if (value == "identity") cfg.quad_kind = QuadraticKind::kIdentity;
        else if (value == "spd") cfg.quad_kind = QuadraticKind::kSpd;
        else fail(origin, line_no, "key 'quad_kind': expected identity/spd, got '" + value + "'");
      } else if (key == "center_scale") cfg.center_scale = num("center_scale");
      else if (key == "eig_min") cfg.eig_min = num("eig_min");
      else if (key == "eig_max") cfg.eig_max = num("eig_max");
      else if (key == "input_dim") cfg.input_dim = static_cast<int>(integer("input_dim"));
      else if (key == "shared_widths") {
        cfg.shared_widths.clear();
        for (const auto& item : split_list(value))
          cfg.shared_widths.push_back(static_cast<int>(parse_long(origin, line_no, "shared_widths", item)));
      } else if (key == "head_hidden") {
        cfg.head_hidden.clear();
        for (const auto& item : split_list(value))
          cfg.head_hidden.push_back(static_cast<int>(parse_long(origin, line_no, "head_hidden", item)));
      } else if (key == "pool_size") cfg.pool_size = static_cast<int>(integer("pool_size"));
      else if (key == "noise_scale") cfg.noise_scale = num("noise_scale");
      else if (key == "n_main") cfg.n_main = static_cast<int>(integer("n_main"));
      else if (key == "target_index") cfg.target_index = static_cast<int>(integer("target_index"));
      else if (key == "aligned_aux") cfg.aligned_aux = parse_bool(origin, line_no, "aligned_aux", value);
      else if (key == "theta0_scale") cfg.theta0_scale = num("theta0_scale");
      else fail(origin, line_no, "unknown key '" + key + "' in [problem]");
    } else if (section == "optimizer") {
      if (key == "type") {
        if (value == "sgd") cfg.opt_kind = OptimizerState::Kind::kSgd;
        else if (value == "adam") cfg.opt_kind = OptimizerState::Kind::kAdam;
        else fail(origin, line_no, "key 'type': expected sgd/adam, got '" + value + "'");
      } else if (key == "alpha") cfg.alpha = num("alpha");
      else if (key == "beta1") cfg.adam_beta1 = num("beta1");
      else if (key == "beta2") cfg.adam_beta2 = num("beta2");
      else if (key == "eps") cfg.adam_eps = num("eps");
      else fail(origin, line_no, "unknown key '" + key + "' in [optimizer]");
    } else if (section == "marigold") {
      if (key == "beta") cfg.beta = num("beta");
      else if (key == "r") cfg.r = num("r");
      else if (key == "upper_lr_u") cfg.upper_lr_u = num("upper_lr_u");
      else if (key == "upper_lr_v") cfg.upper_lr_v = num("upper_lr_v");
      else if (key == "perturb_mode") {
        if (value == "logit") cfg.perturb_mode = PerturbMode::kLogit;
        else if (value == "direct") cfg.perturb_mode = PerturbMode::kDirect;
        else fail(origin, line_no, "key 'perturb_mode': expected logit/direct, got '" + value + "'");
      } else if (key == "batch_policy") {
        if (value == "reuse") cfg.batch_policy = BatchPolicy::kReuse;
        else if (value == "resample") cfg.batch_policy = BatchPolicy::kResample;
        else fail(origin, line_no, "key 'batch_policy': expected reuse/resample, got '" + value + "'");
      } else if (key == "update_schedule") {
        if (value == "simultaneous") cfg.update_schedule = UpdateSchedule::kSimultaneous;
        else if (value == "alternating") cfg.update_schedule = UpdateSchedule::kAlternating;
        else fail(origin, line_no,
                  "key 'update_schedule': expected simultaneous/alternating, got '" + value + "'");
      } else if (key == "aux_r") cfg.aux_r = num("aux_r");
      else if (key == "aux_lr") cfg.aux_lr = num("aux_lr");
      else if (key == "aux_learn_omega") cfg.aux_learn_omega = parse_bool(origin, line_no, "aux_learn_omega", value);
      else if (key == "aux_omega0") cfg.aux_omega0 = num("aux_omega0");
      else fail(origin, line_no, "unknown key '" + key + "' in [marigold]");
    } else {  // [run]
      if (key == "balancer") {
        cfg.balancers.clear();
        for (const auto& item : split_list(value)) {
          try {
            cfg.balancers.push_back(balancer_from_name(item));
          } catch (const ConfigError& e) {
            fail(origin, line_no, std::string("key 'balancer': ") + e.what());
          }
        }
        if (cfg.balancers.empty()) fail(origin, line_no, "key 'balancer': empty list");
      } else if (key == "iterations") cfg.iterations = integer("iterations");
      else if (key == "batch_size") cfg.batch_size = static_cast<int>(integer("batch_size"));
      else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& item : split_list(value))
          cfg.seeds.push_back(parse_u64(origin, line_no, "seeds", item));
        if (cfg.seeds.empty()) fail(origin, line_no, "key 'seeds': empty list");
      } else if (key == "log_stride") cfg.log_stride = integer("log_stride");
      else if (key == "out_dir") cfg.out_dir = value;
      else if (key == "timing") cfg.timing = parse_bool(origin, line_no, "timing", value);
      else if (key == "delta_baseline") cfg.delta_baseline = value;
      else fail(origin, line_no, "unknown key '" + key + "' in [run]");
    }
  }

  validate_config(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void validate_config(const RunConfig& cfg) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("invalid config: " + msg);
  };
  require(cfg.m >= 1, "'m' must be >= 1");
  require(cfg.d >= 1, "'d' must be >= 1");
  require(cfg.center_scale >= 0.0, "'center_scale' must be >= 0");
  require(cfg.eig_min > 0.0, "'eig_min' must be > 0");
  require(cfg.eig_max >= cfg.eig_min, "'eig_max' must be >= eig_min");
  require(cfg.input_dim >= 1, "'input_dim' must be >= 1");
  require(!cfg.shared_widths.empty(), "'shared_widths' needs at least one layer");
  for (int w : cfg.shared_widths) require(w >= 1, "'shared_widths' entries must be >= 1");
  for (int w : cfg.head_hidden) require(w >= 1, "'head_hidden' entries must be >= 1");
  require(cfg.pool_size >= 1, "'pool_size' must be >= 1");
  require(cfg.noise_scale >= 0.0, "'noise_scale' must be >= 0");
  require(cfg.n_main >= 1, "'n_main' must be >= 1");
  require(cfg.target_index >= 0 && cfg.target_index < cfg.n_main,
          "'target_index' must lie in [0, n_main)");
  require(cfg.theta0_scale >= 0.0, "'theta0_scale' must be >= 0");

  require(cfg.alpha > 0.0, "'alpha' must be > 0");
  require(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0, "'beta1' must lie in [0, 1)");
  require(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0, "'beta2' must lie in [0, 1)");
  require(cfg.adam_eps > 0.0, "'eps' must be > 0");

  require(cfg.beta > 0.0, "'beta' must be > 0");
  require(cfg.r > 0.0, "'r' must be > 0");
  require(cfg.upper_lr_u > 0.0, "'upper_lr_u' must be > 0");
  require(cfg.upper_lr_v > 0.0, "'upper_lr_v' must be > 0");
  require(cfg.aux_r > 0.0, "'aux_r' must be > 0");
  require(cfg.aux_lr > 0.0, "'aux_lr' must be > 0");

  require(!cfg.balancers.empty(), "'balancer' needs at least one method");
  std::set<std::string> names;
  for (BalancerKind k : cfg.balancers)
    require(names.insert(balancer_name(k)).second,
            "'balancer' lists '" + balancer_name(k) + "' twice");
  require(cfg.iterations >= 1, "'iterations' must be >= 1");
  require(cfg.batch_size >= 0, "'batch_size' must be >= 0");
  require(!cfg.seeds.empty(), "'seeds' needs at least one seed");
  require(cfg.log_stride >= 1, "'log_stride' must be >= 1");
  if (!cfg.delta_baseline.empty())
    require(names.count(cfg.delta_baseline) == 1,
            "'delta_baseline' must name one of the listed balancers");

  if (cfg.problem == ProblemType::kMlp) {
    require(cfg.batch_size <= cfg.pool_size, "'batch_size' must be <= pool_size");
  }
  const bool needs_m2 =
      std::find(cfg.balancers.begin(), cfg.balancers.end(), BalancerKind::kMarigold) !=
          cfg.balancers.end() ||
      std::find(cfg.balancers.begin(), cfg.balancers.end(), BalancerKind::kPcgrad) !=
          cfg.balancers.end() ||
      std::find(cfg.balancers.begin(), cfg.balancers.end(), BalancerKind::kLinearized) !=
          cfg.balancers.end();
  if (needs_m2 && cfg.problem != ProblemType::kAux)
    require(cfg.m >= 2, "'m' must be >= 2 for the selected balancers");
}

}  // namespace moo
