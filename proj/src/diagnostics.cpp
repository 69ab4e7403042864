#include "vsrl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vsrl/errors.hpp"
#include "vsrl/rollout.hpp"

namespace vsrl {

RatioStats ratio_stats(const Eigen::VectorXd& old_log_probs,
                       const Eigen::VectorXd& new_log_probs, double epsilon) {
  if (old_log_probs.size() != new_log_probs.size()) {
    throw DimensionError("ratio_stats: log-prob vectors differ in length");
  }
  RatioStats stats;
  if (old_log_probs.size() == 0) return stats;
  const Eigen::ArrayXd ratio = (new_log_probs - old_log_probs).array().exp();
  stats.max_ratio = ratio.maxCoeff();
  stats.min_ratio = ratio.minCoeff();
  stats.clip_fraction =
      static_cast<double>(((ratio - 1.0).abs() > epsilon).count()) /
      static_cast<double>(ratio.size());
  return stats;
}

int effective_horizon(double gamma) {
  const double steps = std::ceil(std::log(1e-3) / std::log(gamma));
  return static_cast<int>(std::min(1000.0, steps));
}

std::vector<double> value_estimation_error(const GaussianPolicy& policy,
                                           const MlpSpec& value_spec,
                                           const ParamVector& value_params,
                                           const Env& env,
                                           const Normalizers& normalizers,
                                           double gamma, int num_starts,
                                           int max_steps, Rng& rng) {
  const double scale = normalizers.reward_scale();
  std::vector<double> samples;
  samples.reserve(num_starts);
  for (int i = 0; i < num_starts; ++i) {
    EnvState state = env.reset(rng.next_u64());
    const Eigen::VectorXd obs0 = env.observe(state.physical);
    const double predicted =
        forward(value_spec, value_params, normalizers.apply(obs0))[0];
    double total = 0.0;
    double discount = 1.0;
    for (int k = 0; k < max_steps; ++k) {
      const Eigen::VectorXd obs = env.observe(state.physical);
      const Eigen::VectorXd action =
          deterministic_action(policy, normalizers.apply(obs));
      total += discount * env.reward(state.physical, action) / scale;
      state.physical = env.transition(state.physical, action);
      if (env.is_terminal(state.physical)) break;
      discount *= gamma;
    }
    samples.push_back(total - predicted);
  }
  return samples;
}

EtaSummary summarize_eta(const std::vector<double>& samples) {
  EtaSummary s;
  if (samples.empty()) return s;
  const double n = static_cast<double>(samples.size());
  for (double x : samples) {
    s.mean += x;
    s.abs_mean += std::abs(x);
  }
  s.mean /= n;
  s.abs_mean /= n;
  double sq = 0.0;
  for (double x : samples) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / n);
  return s;
}

namespace {

double rollout_return(const GaussianPolicy& policy, const Env& env,
                      const Normalizers& normalizers, std::uint64_t seed,
                      bool discounted, double gamma) {
  EnvState state = env.reset(seed);
  double total = 0.0;
  double discount = 1.0;
  while (true) {
    const Eigen::VectorXd action = deterministic_action(
        policy, normalizers.apply(env.observe(state.physical)));
    const StepResult r = env.step(state, action);
    total += discount * r.reward;
    if (r.terminated || r.truncated) break;
    if (discounted) discount *= gamma;
  }
  return total;
}

}  // namespace

double evaluate_return(const GaussianPolicy& policy, const Env& env,
                       const Normalizers& normalizers, int episodes,
                       std::uint64_t seed) {
  double total = 0.0;
  for (int i = 0; i < episodes; ++i) {
    total += rollout_return(policy, env, normalizers,
                            mix_seed(seed, static_cast<std::uint64_t>(i)),
                            false, 1.0);
  }
  return episodes > 0 ? total / episodes : 0.0;
}

double lyapunov_exponent(const StateMap& system, const StateDelta& delta,
                         const Eigen::VectorXd& s0, int steps,
                         int renorm_interval, double perturbation) {
  if (steps <= 0 || renorm_interval <= 0 || !(perturbation > 0.0)) {
    throw std::invalid_argument(
        "lyapunov_exponent: steps, renorm_interval and perturbation must be "
        "positive");
  }
  const Eigen::Index n = s0.size();
  Eigen::VectorXd x = s0;
  Eigen::VectorXd y =
      s0 + Eigen::VectorXd::Constant(n, perturbation / std::sqrt(double(n)));
  double log_growth = 0.0;
  for (int i = 1; i <= steps; ++i) {
    x = system(x);
    y = system(y);
    if (!x.allFinite() || !y.allFinite()) {
      throw NumericalError("lyapunov_exponent: trajectory became non-finite at step " +
                           std::to_string(i));
    }
    if (i % renorm_interval == 0 || i == steps) {
      const Eigen::VectorXd d = delta(y, x);
      const double dist = d.norm();
      if (!(dist > 0.0)) {
        throw NumericalError("lyapunov_exponent: trajectories merged at step " +
                             std::to_string(i));
      }
      log_growth += std::log(dist / perturbation);
      y = x + d * (perturbation / dist);
    }
  }
  return log_growth / static_cast<double>(steps);
}

StateMap closed_loop(const Env& env, const GaussianPolicy& policy,
                     const Normalizers& normalizers) {
  return [&env, &policy, &normalizers](const Eigen::VectorXd& s) {
    const Eigen::VectorXd action =
        deterministic_action(policy, normalizers.apply(env.observe(s)));
    return env.transition(s, action);
  };
}

StateMap zero_action_dynamics(const Env& env) {
  return [&env](const Eigen::VectorXd& s) {
    return env.transition(s, Eigen::VectorXd::Zero(env.action_dim()));
  };
}

StateDelta env_delta(const Env& env) {
  return [&env](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return env.state_delta(a, b);
  };
}

SlopeEstimate fit_log_slope(const std::vector<double>& scales,
                            const std::vector<double>& diffs) {
  if (scales.size() != diffs.size()) {
    throw DimensionError("fit_log_slope: scales and differences differ in length");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  SlopeEstimate est;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double d = std::abs(diffs[i]);
    if (!(d > 0.0) || !std::isfinite(d)) continue;
    xs.push_back(std::log(scales[i]));
    ys.push_back(std::log(d));
    est.scales.push_back(scales[i]);
  }
  if (xs.size() < 4) {
    throw NumericalError("holder fit needs at least 4 non-zero differences, got " +
                         std::to_string(xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  est.alpha = sxy / sxx;
  est.intercept = my - est.alpha * mx;
  est.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return est;
}

SlopeEstimate holder_exponent(const Objective& objective,
                              const Eigen::VectorXd& theta,
                              const Eigen::VectorXd& direction,
                              const std::vector<double>& scales) {
  if (scales.size() < 4) {
    throw std::invalid_argument("holder_exponent: need at least 4 scales");
  }
  const auto [lo, hi] = std::minmax_element(scales.begin(), scales.end());
  if (!(*lo > 0.0) || *hi / *lo < 100.0) {
    throw std::invalid_argument(
        "holder_exponent: scales must be positive and span two decades");
  }
  const double base = objective(theta);
  std::vector<double> diffs;
  diffs.reserve(scales.size());
  for (double h : scales) diffs.push_back(objective(theta + h * direction) - base);
  return fit_log_slope(scales, diffs);
}

double policy_objective(const GaussianPolicy& policy, const Env& env,
                        const Normalizers& normalizers,
                        const SliceOptions& options) {
  double total = 0.0;
  for (int i = 0; i < options.rollouts_per_point; ++i) {
    total += rollout_return(policy, env, normalizers,
                            mix_seed(options.seed, static_cast<std::uint64_t>(i)),
                            options.discounted, options.gamma);
  }
  return total / options.rollouts_per_point;
}

std::vector<std::pair<double, double>> objective_slice(
    const GaussianPolicy& policy, const Env& env,
    const Normalizers& normalizers, const Eigen::VectorXd& direction,
    const std::vector<double>& h_grid, const SliceOptions& options) {
  if (direction.size() != policy.mean_net.values.size()) {
    throw DimensionError("objective_slice: direction must span the mean network");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(h_grid.size());
  GaussianPolicy probe = policy;
  for (double h : h_grid) {
    probe.mean_net.values = policy.mean_net.values + h * direction;
    out.emplace_back(h, policy_objective(probe, env, normalizers, options));
  }
  return out;
}

}  // namespace vsrl
