#ifndef VSRL_POLICY_HPP_
#define VSRL_POLICY_HPP_

#include <Eigen/Core>
#include <cstdint>

#include "vsrl/mlp.hpp"
#include "vsrl/rng.hpp"

namespace vsrl {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian over actions: mean from an MLP of the observation,
// state-independent learnable log standard deviations. Actions are not
// squashed; environments clip them.
struct GaussianPolicy {
  MlpSpec mean_spec;
  ParamVector mean_net;
  Eigen::VectorXd log_std;

  static GaussianPolicy create(const MlpSpec& mean_spec, std::uint64_t seed,
                               double head_gain = 0.01);

  int action_dim() const { return mean_spec.output_dim; }

  // Optimizer view: mean-net weights followed by log_std.
  Eigen::Index flat_size() const;
  Eigen::VectorXd flat() const;
  void set_flat(const Eigen::VectorXd& flat);
  void clamp_log_std();
};

struct ActionSample {
  Eigen::VectorXd action;
  double log_prob = 0.0;
};

Eigen::VectorXd policy_mean(const GaussianPolicy& policy,
                            const Eigen::VectorXd& obs);

ActionSample sample(const GaussianPolicy& policy, const Eigen::VectorXd& obs,
                    Rng& rng);

double log_density(const GaussianPolicy& policy, const Eigen::VectorXd& obs,
                   const Eigen::VectorXd& action);

Eigen::VectorXd deterministic_action(const GaussianPolicy& policy,
                                     const Eigen::VectorXd& obs);

double entropy(const GaussianPolicy& policy);

// Per-column log densities of `actions` under N(means, diag(exp(log_std)^2)).
Eigen::VectorXd gaussian_log_density(const Eigen::MatrixXd& means,
                                     const Eigen::VectorXd& log_std,
                                     const Eigen::MatrixXd& actions);

// Batch mean of KL(old || new) with both policies evaluated on `obs`.
// `old_means` are the old policy's means on the same batch.
double gaussian_kl(const Eigen::MatrixXd& old_means,
                   const Eigen::VectorXd& old_log_std,
                   const GaussianPolicy& current, const Eigen::MatrixXd& obs);

// Cached batch evaluation of a policy on (obs, actions).
struct PolicyForward {
  MlpTape tape;
  Eigen::MatrixXd means;
  Eigen::VectorXd log_probs;
};

PolicyForward evaluate_policy(const GaussianPolicy& policy,
                              const Eigen::MatrixXd& obs,
                              const Eigen::MatrixXd& actions);

// Flat gradient of sum_t weights_t * log pi(a_t | s_t).
Eigen::VectorXd log_prob_gradient(const GaussianPolicy& policy,
                                  const PolicyForward& forward,
                                  const Eigen::MatrixXd& actions,
                                  const Eigen::VectorXd& weights);

}  // namespace vsrl

#endif  // VSRL_POLICY_HPP_
