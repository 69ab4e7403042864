#ifndef VSRL_ROLLOUT_HPP_
#define VSRL_ROLLOUT_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "vsrl/envs.hpp"
#include "vsrl/mlp.hpp"
#include "vsrl/normalize.hpp"
#include "vsrl/policy.hpp"
#include "vsrl/rng.hpp"

namespace vsrl {

struct GaeConfig {
  double gamma = 0.99;
  double lambda = 0.95;

  // Throws ConfigError unless gamma in (0, 1) and lambda in [0, 1].
  void validate() const;
};

// Observation and reward normalization state carried across iterations.
struct Normalizers {
  bool observations_enabled = true;
  RunningMoments observation;
  bool rewards_enabled = false;
  RewardNormalizer reward;

  Normalizers() = default;
  Normalizers(int obs_dim, int num_envs, double gamma, bool normalize_obs,
              bool normalize_rewards);

  // Uses the frozen statistics; identity when disabled.
  Eigen::VectorXd apply(const Eigen::VectorXd& obs) const;
  Eigen::MatrixXd apply_batch(const Eigen::MatrixXd& obs) const;
  // Divisor applied to rewards (1 when disabled).
  double reward_scale() const;
};

// One iteration of experience, time-major: transition (t, e) lives at column
// / index t * num_envs + e.
struct RolloutBatch {
  int num_envs = 0;
  int horizon = 0;
  Eigen::MatrixXd observations;      // normalized, as fed to the networks
  Eigen::MatrixXd raw_observations;
  Eigen::MatrixXd actions;
  Eigen::VectorXd log_probs;
  Eigen::VectorXd rewards;           // after reward normalization
  Eigen::VectorXd raw_rewards;
  Eigen::VectorXd value_predictions;
  std::vector<std::uint8_t> terminated;
  std::vector<std::uint8_t> truncated;
  // V(s_{t+1}) for transitions that close a stream segment without a
  // termination: truncations and the last step of each env. Zero elsewhere.
  Eigen::VectorXd bootstrap_values;
  // Undiscounted raw returns of episodes that finished during collection.
  std::vector<double> episode_returns;

  int size() const { return num_envs * horizon; }
  int index(int t, int env) const { return t * num_envs + env; }
};

// Steps every env `horizon` times with actions sampled from `policy`.
// Normalizer statistics are updated online. Throws NumericalError when a
// network produces a non-finite value.
RolloutBatch collect_rollout(const GaussianPolicy& policy,
                             const MlpSpec& value_spec,
                             const ParamVector& value_params, VecEnv& venv,
                             int horizon, Normalizers& normalizers, Rng& rng);

struct AdvantageEstimate {
  Eigen::VectorXd advantages;
  Eigen::VectorXd value_targets;
};

// GAE(lambda) per env stream. Terminations cut both the bootstrap and the
// recursion; truncations bootstrap from bootstrap_values but still cut the
// recursion. value_targets = advantages + value_predictions.
AdvantageEstimate compute_gae(const RolloutBatch& batch, const GaeConfig& cfg);

// Direct discounted-sum targets: sum_k gamma^(k-t) r_k plus the discounted
// bootstrap value where the segment was cut without a termination.
Eigen::VectorXd monte_carlo_targets(const RolloutBatch& batch, double gamma);

// (a - mean) / (std + 1e-8) over the whole batch.
Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& advantages);

}  // namespace vsrl

#endif  // VSRL_ROLLOUT_HPP_
