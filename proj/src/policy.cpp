#include "vsrl/policy.hpp"

#include <cmath>
#include <numbers>

#include "vsrl/errors.hpp"

namespace vsrl {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

GaussianPolicy GaussianPolicy::create(const MlpSpec& mean_spec,
                                      std::uint64_t seed, double head_gain) {
  GaussianPolicy policy;
  policy.mean_spec = mean_spec;
  policy.mean_net = init_mlp(mean_spec, seed, head_gain);
  policy.log_std = Eigen::VectorXd::Zero(mean_spec.output_dim);
  return policy;
}

Eigen::Index GaussianPolicy::flat_size() const {
  return mean_net.values.size() + log_std.size();
}

Eigen::VectorXd GaussianPolicy::flat() const {
  Eigen::VectorXd out(flat_size());
  out << mean_net.values, log_std;
  return out;
}

void GaussianPolicy::set_flat(const Eigen::VectorXd& flat) {
  if (flat.size() != flat_size()) {
    throw DimensionError("policy flat vector has wrong length");
  }
  mean_net.values = flat.head(mean_net.values.size());
  log_std = flat.tail(log_std.size());
}

void GaussianPolicy::clamp_log_std() {
  log_std = log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

Eigen::VectorXd policy_mean(const GaussianPolicy& policy,
                            const Eigen::VectorXd& obs) {
  return forward(policy.mean_spec, policy.mean_net, obs);
}

ActionSample sample(const GaussianPolicy& policy, const Eigen::VectorXd& obs,
                    Rng& rng) {
  const Eigen::VectorXd mean = policy_mean(policy, obs);
  Eigen::VectorXd noise(mean.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = rng.normal();
  ActionSample s;
  s.action = mean + (policy.log_std.array().exp() * noise.array()).matrix();
  s.log_prob = gaussian_log_density(mean, policy.log_std, s.action)[0];
  return s;
}

double log_density(const GaussianPolicy& policy, const Eigen::VectorXd& obs,
                   const Eigen::VectorXd& action) {
  return gaussian_log_density(policy_mean(policy, obs), policy.log_std,
                              action)[0];
}

Eigen::VectorXd deterministic_action(const GaussianPolicy& policy,
                                     const Eigen::VectorXd& obs) {
  return policy_mean(policy, obs);
}

double entropy(const GaussianPolicy& policy) {
  return (policy.log_std.array() + 0.5 + kHalfLog2Pi).sum();
}

Eigen::VectorXd gaussian_log_density(const Eigen::MatrixXd& means,
                                     const Eigen::VectorXd& log_std,
                                     const Eigen::MatrixXd& actions) {
  if (means.rows() != log_std.size() || actions.rows() != means.rows() ||
      actions.cols() != means.cols()) {
    throw DimensionError("log density: mean, action and log_std shapes differ");
  }
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  Eigen::VectorXd out(means.cols());
  for (Eigen::Index t = 0; t < means.cols(); ++t) {
    const Eigen::ArrayXd diff = (actions.col(t) - means.col(t)).array();
    out[t] = (-0.5 * diff.square() * inv_var - log_std.array() - kHalfLog2Pi)
                 .sum();
  }
  return out;
}

double gaussian_kl(const Eigen::MatrixXd& old_means,
                   const Eigen::VectorXd& old_log_std,
                   const GaussianPolicy& current, const Eigen::MatrixXd& obs) {
  const Eigen::MatrixXd new_means =
      forward_batch(current.mean_spec, current.mean_net, obs);
  if (new_means.rows() != old_means.rows() ||
      new_means.cols() != old_means.cols()) {
    throw DimensionError("gaussian_kl: old and new batches differ in shape");
  }
  const Eigen::ArrayXd old_var = (2.0 * old_log_std.array()).exp();
  const Eigen::ArrayXd new_var = (2.0 * current.log_std.array()).exp();
  const Eigen::ArrayXd log_ratio = current.log_std.array() - old_log_std.array();
  double total = 0.0;
  for (Eigen::Index t = 0; t < obs.cols(); ++t) {
    const Eigen::ArrayXd diff =
        (old_means.col(t) - new_means.col(t)).array();
    total += (log_ratio + (old_var + diff.square()) / (2.0 * new_var) - 0.5)
                 .sum();
  }
  return obs.cols() > 0 ? total / static_cast<double>(obs.cols()) : 0.0;
}

PolicyForward evaluate_policy(const GaussianPolicy& policy,
                              const Eigen::MatrixXd& obs,
                              const Eigen::MatrixXd& actions) {
  PolicyForward f;
  f.means = forward_batch(policy.mean_spec, policy.mean_net, obs, &f.tape);
  f.log_probs = gaussian_log_density(f.means, policy.log_std, actions);
  return f;
}

Eigen::VectorXd log_prob_gradient(const GaussianPolicy& policy,
                                  const PolicyForward& forward,
                                  const Eigen::MatrixXd& actions,
                                  const Eigen::VectorXd& weights) {
  const Eigen::ArrayXd inv_var = (-2.0 * policy.log_std.array()).exp();
  // d log pi / d mean = (a - mu) / sigma^2
  // d log pi / d log_std = (a - mu)^2 / sigma^2 - 1
  Eigen::MatrixXd scaled = actions - forward.means;
  Eigen::VectorXd log_std_grad = Eigen::VectorXd::Zero(policy.log_std.size());
  for (Eigen::Index t = 0; t < scaled.cols(); ++t) {
    const Eigen::ArrayXd z2 = scaled.col(t).array().square() * inv_var;
    log_std_grad.array() += weights[t] * (z2 - 1.0);
    scaled.col(t) =
        (scaled.col(t).array() * inv_var * weights[t]).matrix();
  }
  const Gradient mean_grad = backward_batch(policy.mean_spec, policy.mean_net,
                                            forward.tape, scaled);
  Eigen::VectorXd out(policy.flat_size());
  out << mean_grad.values, log_std_grad;
  return out;
}

}  // namespace vsrl
