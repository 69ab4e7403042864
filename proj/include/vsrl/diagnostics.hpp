#ifndef VSRL_DIAGNOSTICS_HPP_
#define VSRL_DIAGNOSTICS_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "vsrl/envs.hpp"
#include "vsrl/mlp.hpp"
#include "vsrl/policy.hpp"
#include "vsrl/rng.hpp"

namespace vsrl {

struct Normalizers;

// ---------------------------------------------------------------------------
// Probability-ratio trust region

struct RatioStats {
  double max_ratio = 1.0;
  double min_ratio = 1.0;
  // Share of samples with |r_t - 1| > epsilon.
  double clip_fraction = 0.0;
};

RatioStats ratio_stats(const Eigen::VectorXd& old_log_probs,
                       const Eigen::VectorXd& new_log_probs, double epsilon);

// ---------------------------------------------------------------------------
// Value-estimation error
//
// eta(s0) = sum_{k < T} gamma^k R(s_k, a_k) - V(s0), rolled out with the
// deterministic policy from s0 ~ rho0 until termination or T steps. The
// environment's own time limit is ignored so the sum approximates the
// infinite-horizon return the value network is trained towards. Rewards are
// divided by the (frozen) reward-normalizer scale so both terms share units.

// min(1000, ceil(log(1e-3) / log(gamma)))
int effective_horizon(double gamma);

std::vector<double> value_estimation_error(const GaussianPolicy& policy,
                                           const MlpSpec& value_spec,
                                           const ParamVector& value_params,
                                           const Env& env,
                                           const Normalizers& normalizers,
                                           double gamma, int num_starts,
                                           int max_steps, Rng& rng);

struct EtaSummary {
  double mean = 0.0;
  double abs_mean = 0.0;
  double std = 0.0;
};

EtaSummary summarize_eta(const std::vector<double>& samples);

// Mean undiscounted return of `episodes` deterministic-policy episodes; start
// i is drawn from mix_seed(seed, i).
double evaluate_return(const GaussianPolicy& policy, const Env& env,
                       const Normalizers& normalizers, int episodes,
                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Maximal Lyapunov exponent (two-trajectory method with renormalization)

using StateMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using StateDelta = std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                                 const Eigen::VectorXd&)>;

// Nats per step. The perturbation starts along (1, ..., 1) / sqrt(n). Throws
// NumericalError naming the step if a trajectory becomes non-finite or the
// two trajectories coincide exactly.
double lyapunov_exponent(const StateMap& system, const StateDelta& delta,
                         const Eigen::VectorXd& s0, int steps,
                         int renorm_interval, double perturbation = 1e-8);

// Closed-loop physical dynamics s -> f(s, mean(obs(s))) of an environment.
StateMap closed_loop(const Env& env, const GaussianPolicy& policy,
                     const Normalizers& normalizers);
// Open-loop dynamics with zero action (used for the 1-D maps).
StateMap zero_action_dynamics(const Env& env);
StateDelta env_delta(const Env& env);

// ---------------------------------------------------------------------------
// Hoelder exponent of an objective along a direction

struct SlopeEstimate {
  double alpha = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> scales;  // the h values that entered the fit
};

// Least-squares slope of log|diffs| against log(scales). Zero differences
// are dropped; fewer than 4 surviving points throws NumericalError.
SlopeEstimate fit_log_slope(const std::vector<double>& scales,
                            const std::vector<double>& diffs);

using Objective = std::function<double(const Eigen::VectorXd&)>;

// Fits |J(theta + h d) - J(theta)| ~ h^alpha over `scales`, which must span
// at least two decades. The objective should use common random numbers.
SlopeEstimate holder_exponent(const Objective& objective,
                              const Eigen::VectorXd& theta,
                              const Eigen::VectorXd& direction,
                              const std::vector<double>& scales);

// ---------------------------------------------------------------------------
// Objective landscape slices

struct SliceOptions {
  int rollouts_per_point = 8;
  std::uint64_t seed = 0;
  bool discounted = false;
  double gamma = 0.99;
};

// Mean return of deterministic-policy rollouts; rollout i starts from
// mix_seed(seed, i) so every call with the same options sees the same starts.
double policy_objective(const GaussianPolicy& policy, const Env& env,
                        const Normalizers& normalizers,
                        const SliceOptions& options);

// (h, J(theta + h d)) for every h in `h_grid`; `direction` spans the mean
// network's weights.
std::vector<std::pair<double, double>> objective_slice(
    const GaussianPolicy& policy, const Env& env,
    const Normalizers& normalizers, const Eigen::VectorXd& direction,
    const std::vector<double>& h_grid, const SliceOptions& options);

}  // namespace vsrl

#endif  // VSRL_DIAGNOSTICS_HPP_
