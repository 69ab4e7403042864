#include "vsrl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vsrl/errors.hpp"
#include "vsrl/textio.hpp"

namespace vsrl {

namespace {

constexpr double kPi = std::numbers::pi;

class Pendulum final : public Env {
 public:
  explicit Pendulum(const EnvOptions& o)
      : horizon_(o.horizon > 0 ? o.horizon : 200),
        dt_(o.dt > 0 ? o.dt : 0.05) {}

  int observation_dim() const override { return 3; }
  int action_dim() const override { return 1; }
  int state_dim() const override { return 2; }
  int horizon() const override { return horizon_; }
  double dt() const override { return dt_; }
  double action_bound() const override { return kMaxTorque; }
  double lipschitz_bound() const override { return 2.0; }

  Eigen::VectorXd sample_initial(Rng& rng) const override {
    Eigen::VectorXd s(2);
    s << rng.uniform(-kPi, kPi), rng.uniform(-1.0, 1.0);
    return s;
  }

  Eigen::VectorXd observe(const Eigen::VectorXd& s) const override {
    Eigen::VectorXd o(3);
    o << std::cos(s[0]), std::sin(s[0]), s[1];
    return o;
  }

  Eigen::VectorXd transition(const Eigen::VectorXd& s,
                             const Eigen::VectorXd& a) const override {
    const double u = std::clamp(a[0], -kMaxTorque, kMaxTorque);
    double vel = s[1] + (3.0 * kG / (2.0 * kLength) * std::sin(s[0]) +
                         3.0 / (kMass * kLength * kLength) * u) *
                            dt_;
    vel = std::clamp(vel, -kMaxSpeed, kMaxSpeed);
    Eigen::VectorXd next(2);
    next << wrap_angle(s[0] + vel * dt_), vel;
    return next;
  }

  double reward(const Eigen::VectorXd& s,
                const Eigen::VectorXd& a) const override {
    const double u = std::clamp(a[0], -kMaxTorque, kMaxTorque);
    const double th = wrap_angle(s[0]);
    return -(th * th + 0.1 * s[1] * s[1] + 0.001 * u * u);
  }

  bool is_terminal(const Eigen::VectorXd&) const override { return false; }

  Eigen::VectorXd state_delta(const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) const override {
    Eigen::VectorXd d = a - b;
    d[0] = wrap_angle(d[0]);
    return d;
  }

 private:
  static constexpr double kG = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;
  int horizon_;
  double dt_;
};

// Two point masses on massless rods; angles are absolute, measured from the
// upward vertical.
class DoublePendulum final : public Env {
 public:
  explicit DoublePendulum(const EnvOptions& o)
      : horizon_(o.horizon > 0 ? o.horizon : 400),
        dt_(o.dt > 0 ? o.dt : 0.02) {}

  int observation_dim() const override { return 6; }
  int action_dim() const override { return 1; }
  int state_dim() const override { return 4; }
  int horizon() const override { return horizon_; }
  double dt() const override { return dt_; }
  double action_bound() const override { return kMaxTorque; }
  // Dominated by the w^2 coupling terms at the speed limit.
  double lipschitz_bound() const override { return 40.0; }

  Eigen::VectorXd sample_initial(Rng& rng) const override {
    Eigen::VectorXd s(4);
    for (int i = 0; i < 4; ++i) s[i] = rng.uniform(-0.1, 0.1);
    return s;
  }

  Eigen::VectorXd observe(const Eigen::VectorXd& s) const override {
    Eigen::VectorXd o(6);
    o << std::cos(s[0]), std::sin(s[0]), std::cos(s[1]), std::sin(s[1]), s[2],
        s[3];
    return o;
  }

  Eigen::VectorXd transition(const Eigen::VectorXd& s,
                             const Eigen::VectorXd& a) const override {
    const double tau = std::clamp(a[0], -kMaxTorque, kMaxTorque);
    const double p1 = s[0], p2 = s[1], w1 = s[2], w2 = s[3];
    const double diff = p1 - p2;
    const double c = std::cos(diff);
    const double sn = std::sin(diff);
    // M * acc = rhs with M = [[2, c], [c, 1]] for unit masses and lengths.
    const double m11 = 2.0, m12 = c, m22 = 1.0;
    const double rhs1 = 2.0 * kG * std::sin(p1) - sn * w2 * w2 + tau;
    const double rhs2 = kG * std::sin(p2) + sn * w1 * w1;
    const double det = m11 * m22 - m12 * m12;
    const double acc1 = (m22 * rhs1 - m12 * rhs2) / det;
    const double acc2 = (m11 * rhs2 - m12 * rhs1) / det;
    const double nw1 = std::clamp(w1 + acc1 * dt_, -kMaxSpeed, kMaxSpeed);
    const double nw2 = std::clamp(w2 + acc2 * dt_, -kMaxSpeed, kMaxSpeed);
    Eigen::VectorXd next(4);
    next << wrap_angle(p1 + nw1 * dt_), wrap_angle(p2 + nw2 * dt_), nw1, nw2;
    return next;
  }

  double reward(const Eigen::VectorXd& s,
                const Eigen::VectorXd&) const override {
    const double x = std::sin(s[0]) + std::sin(s[1]);
    const double y = std::cos(s[0]) + std::cos(s[1]);
    return -(x * x + (y - 2.0) * (y - 2.0));
  }

  bool is_terminal(const Eigen::VectorXd& s) const override {
    return std::cos(s[0]) + std::cos(s[1]) < 0.0;
  }

  Eigen::VectorXd state_delta(const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) const override {
    Eigen::VectorXd d = a - b;
    d[0] = wrap_angle(d[0]);
    d[1] = wrap_angle(d[1]);
    return d;
  }

 private:
  static constexpr double kG = 10.0;
  static constexpr double kMaxTorque = 10.0;
  static constexpr double kMaxSpeed = 20.0;
  int horizon_;
  double dt_;
};

class Map1d final : public Env {
 public:
  explicit Map1d(const EnvOptions& o)
      : horizon_(o.horizon > 0 ? o.horizon : 200), kind_(o.map) {}

  int observation_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  int state_dim() const override { return 1; }
  int horizon() const override { return horizon_; }
  double dt() const override { return 1.0; }
  double action_bound() const override { return 1.0; }
  double lipschitz_bound() const override {
    switch (kind_) {
      case MapKind::kDoubling: return 2.0;
      case MapKind::kLogistic: return 4.0;
      case MapKind::kContraction: return 0.5;
    }
    return 0.0;
  }

  Eigen::VectorXd sample_initial(Rng& rng) const override {
    return Eigen::VectorXd::Constant(1, rng.uniform(0.0, 1.0));
  }

  Eigen::VectorXd observe(const Eigen::VectorXd& s) const override {
    return s;
  }

  Eigen::VectorXd transition(const Eigen::VectorXd& s,
                             const Eigen::VectorXd&) const override {
    const double x = s[0];
    double next = 0.0;
    switch (kind_) {
      case MapKind::kDoubling: {
        next = std::fmod(2.0 * x, 1.0);
        if (next < 0.0) next += 1.0;
        break;
      }
      case MapKind::kLogistic: next = 4.0 * x * (1.0 - x); break;
      case MapKind::kContraction: next = 0.5 * x; break;
    }
    return Eigen::VectorXd::Constant(1, next);
  }

  double reward(const Eigen::VectorXd& s,
                const Eigen::VectorXd&) const override {
    return std::cos(2.0 * kPi * s[0]);
  }

  bool is_terminal(const Eigen::VectorXd&) const override { return false; }

  Eigen::VectorXd state_delta(const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) const override {
    double d = a[0] - b[0];
    if (kind_ == MapKind::kDoubling) d -= std::round(d);
    return Eigen::VectorXd::Constant(1, d);
  }

 private:
  int horizon_;
  MapKind kind_;
};

}  // namespace

double wrap_angle(double angle) {
  double wrapped = std::fmod(angle + kPi, 2.0 * kPi);
  if (wrapped < 0.0) wrapped += 2.0 * kPi;
  return wrapped - kPi;
}

EnvId parse_env_id(const std::string& name) {
  if (name == "pendulum_swingup") return EnvId::kPendulumSwingup;
  if (name == "double_pendulum") return EnvId::kDoublePendulum;
  if (name == "map1d") return EnvId::kMap1d;
  throw ConfigError("unknown environment '" + name + "'");
}

std::string to_string(EnvId id) {
  switch (id) {
    case EnvId::kPendulumSwingup: return "pendulum_swingup";
    case EnvId::kDoublePendulum: return "double_pendulum";
    case EnvId::kMap1d: return "map1d";
  }
  return "unknown";
}

MapKind parse_map_kind(const std::string& name) {
  if (name == "doubling") return MapKind::kDoubling;
  if (name == "logistic") return MapKind::kLogistic;
  if (name == "contraction") return MapKind::kContraction;
  throw ConfigError("unknown map '" + name + "'");
}

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::kDoubling: return "doubling";
    case MapKind::kLogistic: return "logistic";
    case MapKind::kContraction: return "contraction";
  }
  return "unknown";
}

std::shared_ptr<const Env> make_env(const EnvOptions& options) {
  switch (options.id) {
    case EnvId::kPendulumSwingup: return std::make_shared<Pendulum>(options);
    case EnvId::kDoublePendulum:
      return std::make_shared<DoublePendulum>(options);
    case EnvId::kMap1d: return std::make_shared<Map1d>(options);
  }
  throw ConfigError("unknown environment id");
}

EnvState Env::reset(std::uint64_t seed) const {
  EnvState state{Eigen::VectorXd(), 0, Rng(seed)};
  reset_in_place(state);
  return state;
}

void Env::reset_in_place(EnvState& state) const {
  state.physical = sample_initial(state.rng);
  state.step_count = 0;
}

StepResult Env::step(EnvState& state, const Eigen::VectorXd& action) const {
  if (action.size() != action_dim()) {
    throw DimensionError("action has " + std::to_string(action.size()) +
                         " entries, environment expects " +
                         std::to_string(action_dim()));
  }
  if (!action.allFinite()) throw NumericalError("non-finite action");
  StepResult result;
  result.reward = reward(state.physical, action);
  state.physical = transition(state.physical, action);
  state.step_count += 1;
  result.observation = observe(state.physical);
  result.terminated = is_terminal(state.physical);
  result.truncated = !result.terminated && state.step_count >= horizon();
  return result;
}

VecEnv::VecEnv(std::shared_ptr<const Env> env, int num_envs,
               std::uint64_t seed)
    : env_(std::move(env)) {
  if (num_envs <= 0) throw ConfigError("num_envs must be positive");
  states_.reserve(num_envs);
  observations_.resize(env_->observation_dim(), num_envs);
  for (int i = 0; i < num_envs; ++i) {
    states_.push_back(env_->reset(mix_seed(seed, static_cast<std::uint64_t>(i))));
    observations_.col(i) = env_->observe(states_.back().physical);
  }
  episode_returns_.assign(num_envs, 0.0);
}

VecStepResult VecEnv::step(const Eigen::MatrixXd& actions) {
  const int n = num_envs();
  if (actions.cols() != n || actions.rows() != env_->action_dim()) {
    throw DimensionError("vec_step: actions must be action_dim x num_envs");
  }
  VecStepResult out;
  out.observations.resize(env_->observation_dim(), n);
  out.final_observations.resize(env_->observation_dim(), n);
  out.rewards.resize(n);
  out.terminated.assign(n, 0);
  out.truncated.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    StepResult r = env_->step(states_[i], actions.col(i));
    out.rewards[i] = r.reward;
    out.terminated[i] = r.terminated;
    out.truncated[i] = r.truncated;
    out.final_observations.col(i) = r.observation;
    episode_returns_[i] += r.reward;
    if (r.terminated || r.truncated) {
      out.completed_returns.push_back(episode_returns_[i]);
      episode_returns_[i] = 0.0;
      env_->reset_in_place(states_[i]);
      out.observations.col(i) = env_->observe(states_[i].physical);
    } else {
      out.observations.col(i) = r.observation;
    }
  }
  observations_ = out.observations;
  return out;
}

std::string VecEnv::serialize() const {
  std::ostringstream out;
  out << states_.size() << '\n';
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const EnvState& s = states_[i];
    out << s.step_count << ' ' << format_real(episode_returns_[i]) << ' '
        << s.physical.size();
    for (Eigen::Index k = 0; k < s.physical.size(); ++k) {
      out << ' ' << format_real(s.physical[k]);
    }
    out << '\n' << s.rng.serialize() << '\n';
  }
  return out.str();
}

void VecEnv::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::size_t count = 0;
  in >> count;
  if (!in || count != states_.size()) {
    throw IoError("environment state does not match num_envs");
  }
  for (std::size_t i = 0; i < count; ++i) {
    EnvState& s = states_[i];
    Eigen::Index dim = 0;
    in >> s.step_count >> episode_returns_[i] >> dim;
    if (!in || dim != env_->state_dim()) {
      throw IoError("malformed environment state");
    }
    s.physical.resize(dim);
    for (Eigen::Index k = 0; k < dim; ++k) in >> s.physical[k];
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    if (!in) throw IoError("truncated environment state");
    s.rng.deserialize(line);
    observations_.col(static_cast<Eigen::Index>(i)) = env_->observe(s.physical);
  }
}

}  // namespace vsrl
