#include "vsrl/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vsrl/errors.hpp"

namespace vsrl {

namespace {

void check_lr(double lr, const char* name) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw ConfigError(std::string(name) + " must be a non-negative number");
  }
}

void check_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string("non-finite ") + what);
  }
}

// One clipped Adam step on the policy; returns the pre-clip gradient norm.
double step_policy(AgentState& agent, const Eigen::VectorXd& grad,
                   double max_grad_norm) {
  Eigen::VectorXd flat = agent.policy.flat();
  adam_step(agent.policy_opt, flat, clip_grad_norm(grad, max_grad_norm));
  agent.policy.set_flat(flat);
  agent.policy.clamp_log_std();
  return grad.norm();
}

double step_value(AgentState& agent, const Eigen::VectorXd& grad,
                  double max_grad_norm) {
  adam_step(agent.value_opt, agent.value.values,
            clip_grad_norm(grad, max_grad_norm));
  return grad.norm();
}

Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& m,
                            const std::vector<int>& idx) {
  return m(Eigen::all, idx);
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  return v(idx);
}

void record_trust_region(IterationStats& stats, const AgentState& agent,
                         const RolloutBatch& batch,
                         const Eigen::MatrixXd& old_means,
                         const Eigen::VectorXd& old_log_std, double epsilon) {
  const PolicyForward after =
      evaluate_policy(agent.policy, batch.observations, batch.actions);
  stats.ratio = ratio_stats(batch.log_probs, after.log_probs, epsilon);
  stats.policy_kl =
      gaussian_kl(old_means, old_log_std, agent.policy, batch.observations);
  stats.entropy = entropy(agent.policy);
}

}  // namespace

void VpgConfig::validate() const {
  if (value_steps < 1) throw ConfigError("algorithm.value_steps must be >= 1");
  check_lr(policy_lr, "algorithm.policy_lr");
  check_lr(value_lr, "algorithm.value_lr");
  if (!(max_grad_norm > 0.0)) throw ConfigError("algorithm.max_grad_norm must be > 0");
  advantage.gae.validate();
}

void PpoConfig::validate() const {
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw ConfigError("algorithm.clip_epsilon must lie in (0, 1)");
  }
  if (epochs < 1) throw ConfigError("algorithm.epochs must be >= 1");
  if (minibatch_size < 1) throw ConfigError("algorithm.minibatch_size must be >= 1");
  check_lr(policy_lr, "algorithm.policy_lr");
  check_lr(value_lr, "algorithm.value_lr");
  if (!(max_grad_norm > 0.0)) throw ConfigError("algorithm.max_grad_norm must be > 0");
  advantage.gae.validate();
}

int PpoConfig::gradient_steps(int batch_size) const {
  return epochs * ((batch_size + minibatch_size - 1) / minibatch_size);
}

AgentState make_agent(int obs_dim, int act_dim,
                      const std::vector<int>& policy_hidden,
                      const std::vector<int>& value_hidden, std::uint64_t seed,
                      double policy_lr, double value_lr) {
  AgentState agent;
  MlpSpec policy_spec{obs_dim, policy_hidden, act_dim};
  agent.policy =
      GaussianPolicy::create(policy_spec, mix_seed(seed, 0x706f6c), 0.01);
  agent.value_spec = MlpSpec{obs_dim, value_hidden, 1};
  agent.value = init_mlp(agent.value_spec, mix_seed(seed, 0x76616c), 1.0);
  agent.policy_opt = AdamState::fresh(agent.policy.flat_size(), policy_lr);
  agent.value_opt = AdamState::fresh(agent.value.values.size(), value_lr);
  return agent;
}

LossGrad vpg_policy_loss(const GaussianPolicy& policy, const Eigen::MatrixXd& obs,
                         const Eigen::MatrixXd& actions,
                         const Eigen::VectorXd& advantages,
                         double entropy_coef) {
  const double n = static_cast<double>(obs.cols());
  const PolicyForward f = evaluate_policy(policy, obs, actions);
  LossGrad out;
  out.loss = -(f.log_probs.array() * advantages.array()).sum() / n -
             entropy_coef * entropy(policy);
  const Eigen::VectorXd weights = -advantages / n;
  out.grad = log_prob_gradient(policy, f, actions, weights);
  out.grad.tail(policy.log_std.size()).array() -= entropy_coef;
  return out;
}

LossGrad value_loss(const MlpSpec& spec, const ParamVector& params,
                    const Eigen::MatrixXd& obs, const Eigen::VectorXd& targets) {
  if (targets.size() != obs.cols()) {
    throw DimensionError("value_loss: one target per observation required");
  }
  const double n = static_cast<double>(obs.cols());
  MlpTape tape;
  const Eigen::MatrixXd pred = forward_batch(spec, params, obs, &tape);
  const Eigen::RowVectorXd residual = pred.row(0) - targets.transpose();
  LossGrad out;
  out.loss = residual.squaredNorm() / n;
  out.grad = backward_batch(spec, params, tape, (2.0 / n) * residual).values;
  return out;
}

LossGrad ppo_clipped_loss(const GaussianPolicy& policy,
                          const Eigen::MatrixXd& obs,
                          const Eigen::MatrixXd& actions,
                          const Eigen::VectorXd& advantages,
                          const Eigen::VectorXd& old_log_probs, double epsilon,
                          double entropy_coef) {
  const Eigen::Index n = obs.cols();
  const PolicyForward f = evaluate_policy(policy, obs, actions);
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(n);
  double objective = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double ratio = std::exp(f.log_probs[t] - old_log_probs[t]);
    const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
    const double unclipped_term = ratio * advantages[t];
    const double clipped_term = clipped * advantages[t];
    if (unclipped_term <= clipped_term) {
      objective += unclipped_term;
      // d(r A)/d log pi = r A
      weights[t] = -unclipped_term / static_cast<double>(n);
    } else {
      objective += clipped_term;
    }
  }
  LossGrad out;
  out.loss = -objective / static_cast<double>(n) - entropy_coef * entropy(policy);
  out.grad = log_prob_gradient(policy, f, actions, weights);
  out.grad.tail(policy.log_std.size()).array() -= entropy_coef;
  return out;
}

AdvantageEstimate estimate_advantages(const RolloutBatch& batch,
                                      const AdvantageConfig& cfg) {
  AdvantageEstimate est;
  if (cfg.use_baseline) {
    est = compute_gae(batch, cfg.gae);
  } else {
    RolloutBatch zeroed = batch;
    zeroed.value_predictions.setZero();
    zeroed.bootstrap_values.setZero();
    est = compute_gae(zeroed, cfg.gae);
  }
  if (cfg.advantage_normalization) {
    est.advantages = normalize_advantages(est.advantages);
  }
  return est;
}

IterationStats vpg_update(AgentState& agent, const RolloutBatch& batch,
                          const VpgConfig& cfg, const ValueStepHook& hook) {
  IterationStats stats;
  const AdvantageEstimate est = estimate_advantages(batch, cfg.advantage);
  const Eigen::VectorXd targets = est.value_targets;
  const Eigen::MatrixXd old_means =
      forward_batch(agent.policy.mean_spec, agent.policy.mean_net,
                    batch.observations);
  const Eigen::VectorXd old_log_std = agent.policy.log_std;

  const LossGrad policy = vpg_policy_loss(agent.policy, batch.observations,
                                          batch.actions, est.advantages,
                                          cfg.entropy_coef);
  check_finite(policy.loss, "policy loss");
  stats.policy_loss = policy.loss;
  stats.policy_grad_norm = step_policy(agent, policy.grad, cfg.max_grad_norm);
  stats.policy_steps = 1;

  double grad_norm_sum = 0.0;
  for (int k = 0; k < cfg.value_steps; ++k) {
    if (hook) hook(k, targets);
    const LossGrad v =
        value_loss(agent.value_spec, agent.value, batch.observations, targets);
    check_finite(v.loss, "value loss");
    if (k == 0) stats.value_loss_pre = v.loss;
    grad_norm_sum += step_value(agent, v.grad, cfg.max_grad_norm);
    stats.value_steps += 1;
  }
  stats.value_grad_norm = grad_norm_sum / cfg.value_steps;
  stats.value_loss_post =
      value_loss(agent.value_spec, agent.value, batch.observations, targets).loss;

  record_trust_region(stats, agent, batch, old_means, old_log_std,
                      cfg.ratio_epsilon);
  return stats;
}

IterationStats ppo_update(AgentState& agent, const RolloutBatch& batch,
                          const PpoConfig& cfg, Rng& rng) {
  IterationStats stats;
  const AdvantageEstimate est = estimate_advantages(batch, cfg.advantage);
  const Eigen::MatrixXd old_means =
      forward_batch(agent.policy.mean_spec, agent.policy.mean_net,
                    batch.observations);
  const Eigen::VectorXd old_log_std = agent.policy.log_std;
  stats.value_loss_pre = value_loss(agent.value_spec, agent.value,
                                    batch.observations, est.value_targets)
                             .loss;

  const int n = batch.size();
  std::vector<int> order(n);
  double policy_loss_sum = 0.0;
  double policy_norm_sum = 0.0;
  double value_norm_sum = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (int start = 0; start < n; start += cfg.minibatch_size) {
      const int stop = std::min(n, start + cfg.minibatch_size);
      const std::vector<int> idx(order.begin() + start, order.begin() + stop);
      const Eigen::MatrixXd obs = gather_cols(batch.observations, idx);
      const Eigen::MatrixXd actions = gather_cols(batch.actions, idx);

      const LossGrad policy = ppo_clipped_loss(
          agent.policy, obs, actions, gather(est.advantages, idx),
          gather(batch.log_probs, idx), cfg.clip_epsilon, cfg.entropy_coef);
      check_finite(policy.loss, "policy loss");
      policy_loss_sum += policy.loss;
      policy_norm_sum += step_policy(agent, policy.grad, cfg.max_grad_norm);
      stats.policy_steps += 1;

      const LossGrad v = value_loss(agent.value_spec, agent.value, obs,
                                    gather(est.value_targets, idx));
      check_finite(v.loss, "value loss");
      value_norm_sum += step_value(agent, v.grad, cfg.max_grad_norm);
      stats.value_steps += 1;
    }
  }
  stats.policy_loss = policy_loss_sum / stats.policy_steps;
  stats.policy_grad_norm = policy_norm_sum / stats.policy_steps;
  stats.value_grad_norm = value_norm_sum / stats.value_steps;
  stats.value_loss_post = value_loss(agent.value_spec, agent.value,
                                     batch.observations, est.value_targets)
                              .loss;
  record_trust_region(stats, agent, batch, old_means, old_log_std,
                      cfg.clip_epsilon);
  return stats;
}

double holder_alpha(double gamma, double lyapunov) {
  if (!(lyapunov > 0.0)) return 1.0;
  return std::min(1.0, -std::log(gamma) / lyapunov);
}

double required_value_steps(double k1, double k2, double policy_lr,
                            double value_lr, double gamma, double lyapunov) {
  const double alpha = holder_alpha(gamma, lyapunov);
  return k1 * std::pow(policy_lr, alpha) / (k2 * value_lr);
}

}  // namespace vsrl
