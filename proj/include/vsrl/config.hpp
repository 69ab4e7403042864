#ifndef VSRL_CONFIG_HPP_
#define VSRL_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vsrl/algorithms.hpp"
#include "vsrl/envs.hpp"

namespace vsrl {

enum class Algorithm { kVpg, kPpo };

std::string to_string(Algorithm algorithm);

// Fully resolved experiment description. Built-in defaults follow the usual
// on-policy settings: 16 envs, batch 2048, gamma 0.99, GAE 0.95, Adam,
// gradient clipping 1.0, [64, 64] tanh networks, observation normalization
// on, reward and advantage normalization off, entropy coefficient 0.
struct ExperimentConfig {
  EnvOptions env;
  int num_envs = 16;
  int batch_size = 2048;
  Algorithm algorithm = Algorithm::kVpg;
  VpgConfig vpg;
  PpoConfig ppo;
  GaeConfig gae;
  bool normalize_observations = true;
  bool normalize_rewards = false;
  bool advantage_normalization = false;
  bool use_baseline = true;
  std::vector<int> policy_hidden{64, 64};
  std::vector<int> value_hidden{64, 64};
  std::int64_t total_env_steps = 500000;
  int eval_interval = 10;      // iterations between evaluations
  int eval_episodes = 20;
  int eta_starts = 10;
  int final_window = 5;        // evaluations averaged into "final return"
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string output_dir = "runs";

  int horizon_per_env() const { return batch_size / num_envs; }
  std::int64_t iterations() const { return total_env_steps / batch_size; }
  double policy_lr() const;
  double value_lr() const;
  // VpgConfig / PpoConfig with the shared GAE and normalization fields copied
  // in.
  VpgConfig resolved_vpg() const;
  PpoConfig resolved_ppo() const;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Flat `key = value` assignments (dotted keys, optional `[section]` headers,
// `#` comments).
using ConfigAssignments = std::vector<std::pair<std::string, std::string>>;

ConfigAssignments read_config_file(const std::string& path);
ConfigAssignments parse_config_text(const std::string& text);
// "key=value" command-line override.
std::pair<std::string, std::string> parse_override(const std::string& text);

// Layered resolution: built-in defaults, then `file_path` (if non-empty),
// then `overrides`. Algorithm-dependent defaults (epochs, mini-batch size,
// learning rates) are applied for keys that were never set. Unknown keys,
// malformed values and violated constraints raise ConfigError.
ExperimentConfig parse_config(const std::string& file_path,
                              const std::vector<std::string>& overrides = {});
ExperimentConfig resolve_config(const ConfigAssignments& assignments);

// Every recognized key.
const std::vector<std::string>& config_keys();

// Canonical `key = value` dump of a resolved config (re-parses to itself).
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace vsrl

#endif  // VSRL_CONFIG_HPP_
