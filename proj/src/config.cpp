#include "vsrl/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "vsrl/errors.hpp"
#include "vsrl/textio.hpp"

namespace vsrl {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw ConfigError("config key '" + key + "': expected " + expected +
                    ", got '" + value + "'");
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) bad_value(key, value, "an integer");
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value, "an integer");
  }
}

int to_int32(const std::string& key, const std::string& value) {
  const std::int64_t v = to_int(key, value);
  if (v < INT32_MIN || v > INT32_MAX) bad_value(key, value, "a 32-bit integer");
  return static_cast<int>(v);
}

double to_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value, "a number");
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value, "a number");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "true or false");
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& part : split(value, ',')) {
    if (part.empty()) continue;
    out.push_back(to_int32(key, part));
  }
  return out;
}

std::string join_ints(const auto& values) {
  std::ostringstream out;
  bool first = true;
  for (auto v : values) {
    if (!first) out << ',';
    out << v;
    first = false;
  }
  return out.str();
}

std::vector<std::uint64_t> default_seeds() {
  std::uint64_t base = 0;
  if (const char* env = std::getenv("VSRL_SEED"); env && *env) {
    base = static_cast<std::uint64_t>(to_int("VSRL_SEED", env));
  }
  return {base, base + 1, base + 2, base + 3, base + 4};
}

// Keys whose defaults depend on the algorithm.
struct Explicit {
  bool epochs = false;
  bool minibatch = false;
  bool policy_lr = false;
  bool value_lr = false;
};

void apply(ExperimentConfig& cfg, Explicit& ex, const std::string& key,
           const std::string& value) {
  if (key == "env") {
    cfg.env.id = parse_env_id(value);
  } else if (key == "env.horizon") {
    cfg.env.horizon = to_int32(key, value);
  } else if (key == "env.dt") {
    cfg.env.dt = to_real(key, value);
  } else if (key == "env.map") {
    cfg.env.map = parse_map_kind(value);
  } else if (key == "env.num_envs") {
    cfg.num_envs = to_int32(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = to_int32(key, value);
  } else if (key == "algorithm") {
    if (value == "vpg") {
      cfg.algorithm = Algorithm::kVpg;
    } else if (value == "ppo") {
      cfg.algorithm = Algorithm::kPpo;
    } else {
      bad_value(key, value, "vpg or ppo");
    }
  } else if (key == "algorithm.value_steps") {
    cfg.vpg.value_steps = to_int32(key, value);
  } else if (key == "algorithm.policy_lr") {
    cfg.vpg.policy_lr = cfg.ppo.policy_lr = to_real(key, value);
    ex.policy_lr = true;
  } else if (key == "algorithm.value_lr") {
    cfg.vpg.value_lr = cfg.ppo.value_lr = to_real(key, value);
    ex.value_lr = true;
  } else if (key == "algorithm.learning_rate") {
    const double lr = to_real(key, value);
    cfg.vpg.policy_lr = cfg.ppo.policy_lr = lr;
    cfg.vpg.value_lr = cfg.ppo.value_lr = lr;
    ex.policy_lr = ex.value_lr = true;
  } else if (key == "algorithm.clip_epsilon") {
    cfg.ppo.clip_epsilon = cfg.vpg.ratio_epsilon = to_real(key, value);
  } else if (key == "algorithm.epochs") {
    cfg.ppo.epochs = to_int32(key, value);
    ex.epochs = true;
  } else if (key == "algorithm.minibatch_size") {
    cfg.ppo.minibatch_size = to_int32(key, value);
    ex.minibatch = true;
  } else if (key == "algorithm.max_grad_norm") {
    cfg.vpg.max_grad_norm = cfg.ppo.max_grad_norm = to_real(key, value);
  } else if (key == "algorithm.entropy_coef") {
    cfg.vpg.entropy_coef = cfg.ppo.entropy_coef = to_real(key, value);
  } else if (key == "algorithm.baseline") {
    cfg.use_baseline = to_bool(key, value);
  } else if (key == "gamma") {
    cfg.gae.gamma = to_real(key, value);
  } else if (key == "gae_lambda") {
    cfg.gae.lambda = to_real(key, value);
  } else if (key == "normalize.observations") {
    cfg.normalize_observations = to_bool(key, value);
  } else if (key == "normalize.rewards") {
    cfg.normalize_rewards = to_bool(key, value);
  } else if (key == "normalize.advantages") {
    cfg.advantage_normalization = to_bool(key, value);
  } else if (key == "network.policy_hidden") {
    cfg.policy_hidden = to_int_list(key, value);
  } else if (key == "network.value_hidden") {
    cfg.value_hidden = to_int_list(key, value);
  } else if (key == "total_env_steps") {
    cfg.total_env_steps = to_int(key, value);
  } else if (key == "eval.interval") {
    cfg.eval_interval = to_int32(key, value);
  } else if (key == "eval.episodes") {
    cfg.eval_episodes = to_int32(key, value);
  } else if (key == "eval.eta_starts") {
    cfg.eta_starts = to_int32(key, value);
  } else if (key == "eval.final_window") {
    cfg.final_window = to_int32(key, value);
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (const auto& part : split(value, ',')) {
      if (part.empty()) continue;
      const std::int64_t s = to_int(key, part);
      if (s < 0) bad_value(key, value, "non-negative seeds");
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  return algorithm == Algorithm::kVpg ? "vpg" : "ppo";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "env", "env.horizon", "env.dt", "env.map", "env.num_envs", "batch_size",
      "algorithm", "algorithm.value_steps", "algorithm.policy_lr",
      "algorithm.value_lr", "algorithm.learning_rate",
      "algorithm.clip_epsilon", "algorithm.epochs", "algorithm.minibatch_size",
      "algorithm.max_grad_norm", "algorithm.entropy_coef",
      "algorithm.baseline", "gamma", "gae_lambda", "normalize.observations",
      "normalize.rewards", "normalize.advantages", "network.policy_hidden",
      "network.value_hidden", "total_env_steps", "eval.interval",
      "eval.episodes", "eval.eta_starts", "eval.final_window", "seeds",
      "output_dir"};
  return keys;
}

double ExperimentConfig::policy_lr() const {
  return algorithm == Algorithm::kVpg ? vpg.policy_lr : ppo.policy_lr;
}

double ExperimentConfig::value_lr() const {
  return algorithm == Algorithm::kVpg ? vpg.value_lr : ppo.value_lr;
}

VpgConfig ExperimentConfig::resolved_vpg() const {
  VpgConfig out = vpg;
  out.advantage = {gae, advantage_normalization, use_baseline};
  return out;
}

PpoConfig ExperimentConfig::resolved_ppo() const {
  PpoConfig out = ppo;
  out.advantage = {gae, advantage_normalization, use_baseline};
  return out;
}

void ExperimentConfig::validate() const {
  gae.validate();
  if (num_envs <= 0) throw ConfigError("env.num_envs must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (batch_size % num_envs != 0) {
    throw ConfigError("batch_size must be a multiple of env.num_envs");
  }
  if (env.horizon < 0) throw ConfigError("env.horizon must be >= 0");
  if (env.dt < 0.0) throw ConfigError("env.dt must be >= 0");
  // A trailing partial batch is dropped: 500000 steps -> 244 iterations.
  if (total_env_steps < batch_size) {
    throw ConfigError("total_env_steps must be at least batch_size");
  }
  if (eval_interval <= 0) throw ConfigError("eval.interval must be positive");
  if (eval_episodes <= 0) throw ConfigError("eval.episodes must be positive");
  if (eta_starts <= 0) throw ConfigError("eval.eta_starts must be positive");
  if (final_window <= 0) throw ConfigError("eval.final_window must be positive");
  if (policy_hidden.empty() || value_hidden.empty()) {
    throw ConfigError("network.*_hidden must list at least one layer");
  }
  for (int w : policy_hidden)
    if (w <= 0) throw ConfigError("network.policy_hidden widths must be positive");
  for (int w : value_hidden)
    if (w <= 0) throw ConfigError("network.value_hidden widths must be positive");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (algorithm == Algorithm::kVpg) {
    if (ppo.epochs != 1) throw ConfigError("algorithm.epochs: vpg uses exactly 1 epoch");
    if (ppo.minibatch_size != batch_size) {
      throw ConfigError("algorithm.minibatch_size: vpg uses the full batch");
    }
    resolved_vpg().validate();
  } else {
    if (vpg.value_steps != 1) {
      throw ConfigError("algorithm.value_steps: only valid for vpg");
    }
    if (ppo.minibatch_size > batch_size) {
      throw ConfigError("algorithm.minibatch_size must not exceed batch_size");
    }
    resolved_ppo().validate();
  }
}

ConfigAssignments parse_config_text(const std::string& text) {
  ConfigAssignments out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": malformed section header");
      }
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (!section.empty()) key = section + "." + key;
    out.emplace_back(std::move(key), value);
  }
  return out;
}

ConfigAssignments read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::pair<std::string, std::string> parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + text + "' must look like key=value");
  }
  return {trim(std::string_view(text).substr(0, eq)),
          trim(std::string_view(text).substr(eq + 1))};
}

ExperimentConfig resolve_config(const ConfigAssignments& assignments) {
  ExperimentConfig cfg;
  cfg.seeds = default_seeds();
  Explicit ex;
  for (const auto& [key, value] : assignments) apply(cfg, ex, key, value);
  if (cfg.algorithm == Algorithm::kVpg) {
    if (!ex.epochs) cfg.ppo.epochs = 1;
    if (!ex.minibatch) cfg.ppo.minibatch_size = cfg.batch_size;
    if (!ex.policy_lr) cfg.vpg.policy_lr = cfg.ppo.policy_lr = 7e-4;
    if (!ex.value_lr) cfg.vpg.value_lr = cfg.ppo.value_lr = 7e-4;
  } else {
    if (!ex.epochs) cfg.ppo.epochs = 10;
    if (!ex.minibatch) cfg.ppo.minibatch_size = 64;
    if (!ex.policy_lr) cfg.vpg.policy_lr = cfg.ppo.policy_lr = 3e-4;
    if (!ex.value_lr) cfg.vpg.value_lr = cfg.ppo.value_lr = 3e-4;
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& file_path,
                              const std::vector<std::string>& overrides) {
  ConfigAssignments all;
  if (!file_path.empty()) all = read_config_file(file_path);
  for (const auto& o : overrides) all.push_back(parse_override(o));
  return resolve_config(all);
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "env = " << to_string(cfg.env.id) << '\n'
      << "env.horizon = " << cfg.env.horizon << '\n'
      << "env.dt = " << format_real(cfg.env.dt) << '\n'
      << "env.map = " << to_string(cfg.env.map) << '\n'
      << "env.num_envs = " << cfg.num_envs << '\n'
      << "batch_size = " << cfg.batch_size << '\n'
      << "algorithm = " << to_string(cfg.algorithm) << '\n'
      << "algorithm.value_steps = " << cfg.vpg.value_steps << '\n'
      << "algorithm.policy_lr = " << format_real(cfg.policy_lr()) << '\n'
      << "algorithm.value_lr = " << format_real(cfg.value_lr()) << '\n'
      << "algorithm.clip_epsilon = " << format_real(cfg.ppo.clip_epsilon) << '\n'
      << "algorithm.epochs = " << cfg.ppo.epochs << '\n'
      << "algorithm.minibatch_size = " << cfg.ppo.minibatch_size << '\n'
      << "algorithm.max_grad_norm = " << format_real(cfg.ppo.max_grad_norm) << '\n'
      << "algorithm.entropy_coef = " << format_real(cfg.ppo.entropy_coef) << '\n'
      << "algorithm.baseline = " << (cfg.use_baseline ? "true" : "false") << '\n'
      << "gamma = " << format_real(cfg.gae.gamma) << '\n'
      << "gae_lambda = " << format_real(cfg.gae.lambda) << '\n'
      << "normalize.observations = "
      << (cfg.normalize_observations ? "true" : "false") << '\n'
      << "normalize.rewards = " << (cfg.normalize_rewards ? "true" : "false")
      << '\n'
      << "normalize.advantages = "
      << (cfg.advantage_normalization ? "true" : "false") << '\n'
      << "network.policy_hidden = " << join_ints(cfg.policy_hidden) << '\n'
      << "network.value_hidden = " << join_ints(cfg.value_hidden) << '\n'
      << "total_env_steps = " << cfg.total_env_steps << '\n'
      << "eval.interval = " << cfg.eval_interval << '\n'
      << "eval.episodes = " << cfg.eval_episodes << '\n'
      << "eval.eta_starts = " << cfg.eta_starts << '\n'
      << "eval.final_window = " << cfg.final_window << '\n'
      << "seeds = " << join_ints(cfg.seeds) << '\n'
      << "output_dir = " << cfg.output_dir << '\n';
  return out.str();
}

}  // namespace vsrl
