#include "vsrl/rollout.hpp"

#include <cmath>
#include <string>

#include "vsrl/errors.hpp"

namespace vsrl {

void GaeConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("gamma must lie in (0, 1), got " + std::to_string(gamma));
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("gae_lambda must lie in [0, 1], got " +
                      std::to_string(lambda));
  }
}

Normalizers::Normalizers(int obs_dim, int num_envs, double gamma,
                         bool normalize_obs, bool normalize_rewards)
    : observations_enabled(normalize_obs),
      observation(obs_dim),
      rewards_enabled(normalize_rewards),
      reward(num_envs, gamma) {}

Eigen::VectorXd Normalizers::apply(const Eigen::VectorXd& obs) const {
  if (!observations_enabled) return obs;
  return normalize_observation(observation, obs);
}

Eigen::MatrixXd Normalizers::apply_batch(const Eigen::MatrixXd& obs) const {
  Eigen::MatrixXd out(obs.rows(), obs.cols());
  for (Eigen::Index i = 0; i < obs.cols(); ++i) out.col(i) = apply(obs.col(i));
  return out;
}

double Normalizers::reward_scale() const {
  return rewards_enabled ? reward.scale() : 1.0;
}

RolloutBatch collect_rollout(const GaussianPolicy& policy,
                             const MlpSpec& value_spec,
                             const ParamVector& value_params, VecEnv& venv,
                             int horizon, Normalizers& normalizers, Rng& rng) {
  const Env& env = venv.env();
  const int num_envs = venv.num_envs();
  const int obs_dim = env.observation_dim();
  const int act_dim = env.action_dim();
  if (horizon <= 0) throw ConfigError("rollout horizon must be positive");
  if (policy.mean_spec.input_dim != obs_dim ||
      policy.mean_spec.output_dim != act_dim ||
      value_spec.input_dim != obs_dim || value_spec.output_dim != 1) {
    throw DimensionError("network shapes do not match the environment");
  }

  RolloutBatch batch;
  batch.num_envs = num_envs;
  batch.horizon = horizon;
  const int n = batch.size();
  batch.observations.resize(obs_dim, n);
  batch.raw_observations.resize(obs_dim, n);
  batch.actions.resize(act_dim, n);
  batch.log_probs.resize(n);
  batch.rewards.resize(n);
  batch.raw_rewards.resize(n);
  batch.value_predictions.resize(n);
  batch.bootstrap_values = Eigen::VectorXd::Zero(n);
  batch.terminated.assign(n, 0);
  batch.truncated.assign(n, 0);

  const Eigen::ArrayXd std_dev = policy.log_std.array().exp();
  auto value_of = [&](const Eigen::VectorXd& raw_obs) {
    return forward(value_spec, value_params, normalizers.apply(raw_obs))[0];
  };

  for (int t = 0; t < horizon; ++t) {
    const Eigen::MatrixXd raw = venv.observations();
    if (normalizers.observations_enabled) {
      for (int e = 0; e < num_envs; ++e) {
        update_moments_in_place(normalizers.observation, raw.col(e));
      }
    }
    const Eigen::MatrixXd obs = normalizers.apply_batch(raw);
    const Eigen::MatrixXd means =
        forward_batch(policy.mean_spec, policy.mean_net, obs);
    const Eigen::MatrixXd values = forward_batch(value_spec, value_params, obs);
    if (!means.allFinite() || !values.allFinite()) {
      throw NumericalError("non-finite network output during collection at step " +
                           std::to_string(t));
    }
    Eigen::MatrixXd actions(act_dim, num_envs);
    for (int e = 0; e < num_envs; ++e) {
      for (int k = 0; k < act_dim; ++k) {
        actions(k, e) = means(k, e) + std_dev[k] * rng.normal();
      }
    }
    const Eigen::VectorXd log_probs =
        gaussian_log_density(means, policy.log_std, actions);

    const int base = t * num_envs;
    batch.raw_observations.middleCols(base, num_envs) = raw;
    batch.observations.middleCols(base, num_envs) = obs;
    batch.actions.middleCols(base, num_envs) = actions;
    batch.log_probs.segment(base, num_envs) = log_probs;
    batch.value_predictions.segment(base, num_envs) = values.row(0).transpose();

    VecStepResult step = venv.step(actions);
    for (int e = 0; e < num_envs; ++e) {
      const int i = base + e;
      const bool done = step.terminated[e] || step.truncated[e];
      batch.raw_rewards[i] = step.rewards[e];
      batch.rewards[i] =
          normalizers.rewards_enabled
              ? normalizers.reward.normalize(e, step.rewards[e], done)
              : step.rewards[e];
      batch.terminated[i] = step.terminated[e];
      batch.truncated[i] = step.truncated[e];
      if (step.truncated[e]) {
        batch.bootstrap_values[i] = value_of(step.final_observations.col(e));
      }
    }
    batch.episode_returns.insert(batch.episode_returns.end(),
                                 step.completed_returns.begin(),
                                 step.completed_returns.end());
  }

  const int last = (horizon - 1) * num_envs;
  for (int e = 0; e < num_envs; ++e) {
    const int i = last + e;
    if (!batch.terminated[i] && !batch.truncated[i]) {
      batch.bootstrap_values[i] = value_of(venv.observations().col(e));
    }
  }
  if (!batch.bootstrap_values.allFinite()) {
    throw NumericalError("non-finite bootstrap value");
  }
  return batch;
}

AdvantageEstimate compute_gae(const RolloutBatch& batch, const GaeConfig& cfg) {
  const int n = batch.size();
  AdvantageEstimate out;
  out.advantages.resize(n);
  for (int e = 0; e < batch.num_envs; ++e) {
    double next_advantage = 0.0;
    for (int t = batch.horizon - 1; t >= 0; --t) {
      const int i = batch.index(t, e);
      const bool terminated = batch.terminated[i];
      const bool cut = terminated || batch.truncated[i] || t == batch.horizon - 1;
      double next_value = 0.0;
      if (!terminated) {
        next_value = cut ? batch.bootstrap_values[i]
                         : batch.value_predictions[batch.index(t + 1, e)];
      }
      const double delta =
          batch.rewards[i] + cfg.gamma * next_value - batch.value_predictions[i];
      const double advantage =
          cut ? delta : delta + cfg.gamma * cfg.lambda * next_advantage;
      out.advantages[i] = advantage;
      next_advantage = advantage;
    }
  }
  out.value_targets = out.advantages + batch.value_predictions;
  return out;
}

Eigen::VectorXd monte_carlo_targets(const RolloutBatch& batch, double gamma) {
  Eigen::VectorXd targets(batch.size());
  for (int e = 0; e < batch.num_envs; ++e) {
    for (int t = 0; t < batch.horizon; ++t) {
      double total = 0.0;
      double discount = 1.0;
      for (int k = t; k < batch.horizon; ++k) {
        const int i = batch.index(k, e);
        total += discount * batch.rewards[i];
        if (batch.terminated[i]) break;
        if (batch.truncated[i] || k == batch.horizon - 1) {
          total += discount * gamma * batch.bootstrap_values[i];
          break;
        }
        discount *= gamma;
      }
      targets[batch.index(t, e)] = total;
    }
  }
  return targets;
}

Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& advantages) {
  const double mean = advantages.mean();
  const Eigen::ArrayXd centered = advantages.array() - mean;
  const double std_dev = std::sqrt(centered.square().mean());
  return (centered / (std_dev + 1e-8)).matrix();
}

}  // namespace vsrl
