#ifndef VSRL_ENVS_HPP_
#define VSRL_ENVS_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vsrl/rng.hpp"

namespace vsrl {

enum class EnvId { kPendulumSwingup, kDoublePendulum, kMap1d };
enum class MapKind { kDoubling, kLogistic, kContraction };

EnvId parse_env_id(const std::string& name);
std::string to_string(EnvId id);
MapKind parse_map_kind(const std::string& name);
std::string to_string(MapKind kind);

// Zero horizon / dt select the environment's documented default.
struct EnvOptions {
  EnvId id = EnvId::kPendulumSwingup;
  int horizon = 0;
  double dt = 0.0;
  MapKind map = MapKind::kDoubling;
};

struct EnvState {
  Eigen::VectorXd physical;
  int step_count = 0;
  Rng rng;
};

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

// Immutable description of one task. All methods are const, so a single
// instance may be shared by any number of states and threads.
//
//   pendulum_swingup: state (theta, theta_dot), theta = 0 upright, wrapped to
//     [-pi, pi], theta_dot saturated to [-8, 8]; torque in [-2, 2]; dt 0.05,
//     g 10, m 1, l 1; reward -(theta^2 + 0.1 theta_dot^2 + 0.001 u^2) on the
//     pre-step state; horizon 200; never terminates.
//   double_pendulum: absolute link angles (phi1, phi2) from upright and their
//     rates, saturated to [-20, 20]; torque in [-10, 10] on the shoulder only
//     (elbow passive); unit masses and lengths, g 10; dt 0.02; horizon 400;
//     reward -(tip distance from the upright tip position)^2; terminates when
//     the tip falls below the pivot.
//   map1d: x in [0, 1) iterated by the doubling, logistic (r = 4) or
//     contraction (x / 2) map; the action is ignored; reward cos(2 pi x);
//     horizon 200.
class Env {
 public:
  virtual ~Env() = default;

  virtual int observation_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int state_dim() const = 0;
  virtual int horizon() const = 0;
  virtual double dt() const = 0;
  virtual double action_bound() const = 0;
  // Documented Lipschitz bound of the dynamics in state_delta's metric.
  virtual double lipschitz_bound() const = 0;

  // Initial physical state drawn from the task's initial distribution.
  virtual Eigen::VectorXd sample_initial(Rng& rng) const = 0;
  virtual Eigen::VectorXd observe(const Eigen::VectorXd& physical) const = 0;
  // Pure dynamics (no step counting); actions are clipped here.
  virtual Eigen::VectorXd transition(const Eigen::VectorXd& physical,
                                     const Eigen::VectorXd& action) const = 0;
  virtual double reward(const Eigen::VectorXd& physical,
                        const Eigen::VectorXd& action) const = 0;
  virtual bool is_terminal(const Eigen::VectorXd& physical) const = 0;
  // a - b with angular (or circular) coordinates wrapped.
  virtual Eigen::VectorXd state_delta(const Eigen::VectorXd& a,
                                      const Eigen::VectorXd& b) const = 0;

  EnvState reset(std::uint64_t seed) const;
  // Redraws the initial state from the state's own stream.
  void reset_in_place(EnvState& state) const;
  // Rejects non-finite actions with NumericalError.
  StepResult step(EnvState& state, const Eigen::VectorXd& action) const;
};

std::shared_ptr<const Env> make_env(const EnvOptions& options);

double wrap_angle(double angle);

struct VecStepResult {
  // Observations after auto-reset, one column per env.
  Eigen::MatrixXd observations;
  Eigen::VectorXd rewards;
  std::vector<std::uint8_t> terminated;
  std::vector<std::uint8_t> truncated;
  // Last observation of the finished episode for envs that hit a boundary;
  // equal to `observations` elsewhere.
  Eigen::MatrixXd final_observations;
  // Undiscounted returns of the episodes that ended on this step.
  std::vector<double> completed_returns;
};

// Fixed set of independently seeded copies of one task. Sub-env i draws from
// Rng::derive(seed, i). Actions arrive one column per env.
class VecEnv {
 public:
  VecEnv(std::shared_ptr<const Env> env, int num_envs, std::uint64_t seed);

  int num_envs() const { return static_cast<int>(states_.size()); }
  const Env& env() const { return *env_; }
  const Eigen::MatrixXd& observations() const { return observations_; }
  const std::vector<EnvState>& states() const { return states_; }
  const std::vector<double>& episode_returns() const { return episode_returns_; }

  VecStepResult step(const Eigen::MatrixXd& actions);

  std::string serialize() const;
  void deserialize(const std::string& text);

 private:
  std::shared_ptr<const Env> env_;
  std::vector<EnvState> states_;
  std::vector<double> episode_returns_;
  Eigen::MatrixXd observations_;
};

}  // namespace vsrl

#endif  // VSRL_ENVS_HPP_
