#ifndef VSRL_ALGORITHMS_HPP_
#define VSRL_ALGORITHMS_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "vsrl/diagnostics.hpp"
#include "vsrl/mlp.hpp"
#include "vsrl/optim.hpp"
#include "vsrl/policy.hpp"
#include "vsrl/rng.hpp"
#include "vsrl/rollout.hpp"

namespace vsrl {

// All losses below are minimized: the policy objectives are negated.

struct AdvantageConfig {
  GaeConfig gae;
  bool advantage_normalization = false;
  // false: treat V as identically zero (REINFORCE-style returns as weights).
  bool use_baseline = true;
};

struct VpgConfig {
  int value_steps = 1;
  double policy_lr = 7e-4;
  double value_lr = 7e-4;
  double max_grad_norm = 1.0;
  double entropy_coef = 0.0;
  // Only used to report the clip fraction of the realized ratios.
  double ratio_epsilon = 0.2;
  AdvantageConfig advantage;

  void validate() const;
};

struct PpoConfig {
  double clip_epsilon = 0.2;
  int epochs = 10;
  int minibatch_size = 64;
  double policy_lr = 3e-4;
  double value_lr = 3e-4;
  double max_grad_norm = 1.0;
  double entropy_coef = 0.0;
  AdvantageConfig advantage;

  void validate() const;
  // epochs * ceil(batch / minibatch)
  int gradient_steps(int batch_size) const;
};

// Separate policy and value networks with their optimizers.
struct AgentState {
  GaussianPolicy policy;
  MlpSpec value_spec;
  ParamVector value;
  AdamState policy_opt;
  AdamState value_opt;
};

AgentState make_agent(int obs_dim, int act_dim,
                      const std::vector<int>& policy_hidden,
                      const std::vector<int>& value_hidden, std::uint64_t seed,
                      double policy_lr, double value_lr);

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// -mean_t[log pi(a_t|s_t) A_t] - entropy_coef * entropy; gradient w.r.t. the
// policy's flat parameters with advantages held constant.
LossGrad vpg_policy_loss(const GaussianPolicy& policy, const Eigen::MatrixXd& obs,
                         const Eigen::MatrixXd& actions,
                         const Eigen::VectorXd& advantages,
                         double entropy_coef = 0.0);

// mean_t (V(s_t) - target_t)^2 and its gradient w.r.t. the value weights.
LossGrad value_loss(const MlpSpec& spec, const ParamVector& params,
                    const Eigen::MatrixXd& obs, const Eigen::VectorXd& targets);

// -mean_t min(r_t A_t, clip(r_t, 1-eps, 1+eps) A_t) - entropy_coef * entropy
// with r_t = exp(log pi(a_t|s_t) - old_log_prob_t). Samples where the clipped
// branch is selected contribute no gradient.
LossGrad ppo_clipped_loss(const GaussianPolicy& policy,
                          const Eigen::MatrixXd& obs,
                          const Eigen::MatrixXd& actions,
                          const Eigen::VectorXd& advantages,
                          const Eigen::VectorXd& old_log_probs, double epsilon,
                          double entropy_coef = 0.0);

struct IterationStats {
  double policy_loss = 0.0;
  double value_loss_pre = 0.0;
  double value_loss_post = 0.0;
  double policy_grad_norm = 0.0;  // mean pre-clip norm over policy steps
  double value_grad_norm = 0.0;   // mean pre-clip norm over value steps
  int policy_steps = 0;
  int value_steps = 0;
  RatioStats ratio;
  double policy_kl = 0.0;
  double entropy = 0.0;
};

// Advantages and regression targets for one batch (GAE with the batch's
// collection-time value predictions, optional normalization).
AdvantageEstimate estimate_advantages(const RolloutBatch& batch,
                                      const AdvantageConfig& cfg);

// Called before every value step with the step index and the targets in use.
using ValueStepHook =
    std::function<void(int step, const Eigen::VectorXd& targets)>;

// One policy step on the batch, then cfg.value_steps value steps against
// targets fixed before the loop. Every step is gradient-clipped Adam.
IterationStats vpg_update(AgentState& agent, const RolloutBatch& batch,
                          const VpgConfig& cfg, const ValueStepHook& hook = {});

// cfg.epochs passes over seeded shuffles of the batch; one policy step and one
// value step per mini-batch. Advantages are computed once.
IterationStats ppo_update(AgentState& agent, const RolloutBatch& batch,
                          const PpoConfig& cfg, Rng& rng);

// K1 * beta1^alpha / (K2 * beta2) with alpha = min(1, -ln(gamma) / lyapunov);
// alpha is 1 for non-positive exponents.
double holder_alpha(double gamma, double lyapunov);
double required_value_steps(double k1, double k2, double policy_lr,
                            double value_lr, double gamma, double lyapunov);

}  // namespace vsrl

#endif  // VSRL_ALGORITHMS_HPP_
