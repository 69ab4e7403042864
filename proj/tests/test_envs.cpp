#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vsrl/envs.hpp"
#include "vsrl/errors.hpp"

using namespace vsrl;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Env> pendulum() { return make_env(EnvOptions{}); }

std::shared_ptr<const Env> map(MapKind kind) {
  EnvOptions o;
  o.id = EnvId::kMap1d;
  o.map = kind;
  return make_env(o);
}

Eigen::VectorXd torque(double u) { return Eigen::VectorXd::Constant(1, u); }

// Total energy of the double pendulum with unit masses and lengths.
double double_pendulum_energy(const Eigen::VectorXd& s) {
  const double c = std::cos(s[0] - s[1]);
  const double kinetic = s[2] * s[2] + 0.5 * s[3] * s[3] + c * s[2] * s[3];
  const double potential = 10.0 * (2.0 * std::cos(s[0]) + std::cos(s[1]));
  return kinetic + potential;
}

}  // namespace

TEST_SUITE("envs") {

TEST_CASE("reset is deterministic per seed") {
  for (EnvId id : {EnvId::kPendulumSwingup, EnvId::kDoublePendulum, EnvId::kMap1d}) {
    EnvOptions o;
    o.id = id;
    const auto env = make_env(o);
    CHECK(env->reset(42).physical == env->reset(42).physical);
    CHECK(env->reset(42).physical != env->reset(43).physical);
  }
}

TEST_CASE("pendulum initial angles lie in [-pi, pi]") {
  const auto env = pendulum();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const double th = env->reset(seed).physical[0];
    CHECK(th >= -kPi);
    CHECK(th <= kPi);
  }
}

TEST_CASE("pendulum observation is (cos, sin, rate)") {
  const auto env = pendulum();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const EnvState s = env->reset(seed);
    const Eigen::VectorXd o = env->observe(s.physical);
    CHECK(o.head(2).norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(o[0] == std::cos(s.physical[0]));
    CHECK(o[2] == s.physical[1]);
  }
}

TEST_CASE("pendulum upright rest is a fixed point with zero reward") {
  const auto env = pendulum();
  const Eigen::Vector2d up(0.0, 0.0);
  CHECK(env->transition(up, torque(0.0)) == Eigen::VectorXd(up));
  CHECK(env->reward(up, torque(0.0)) == 0.0);
  CHECK(env->reward(Eigen::Vector2d(0.0, 0.0), torque(0.5)) < 0.0);
  CHECK(env->reward(Eigen::Vector2d(0.1, 0.0), torque(0.0)) < 0.0);
  CHECK(env->reward(Eigen::Vector2d(0.0, -0.2), torque(0.0)) < 0.0);
}

TEST_CASE("pendulum one step matches the semi-implicit Euler formula") {
  const auto env = pendulum();
  const double th = 0.7, w = -1.3, u = 5.0;  // torque clipped to 2
  const double w1 = w + (15.0 * std::sin(th) + 3.0 * 2.0) * 0.05;
  const double th1 = th + w1 * 0.05;
  const Eigen::VectorXd next = env->transition(Eigen::Vector2d(th, w), torque(u));
  CHECK(next[0] == doctest::Approx(th1).epsilon(1e-15));
  CHECK(next[1] == doctest::Approx(w1).epsilon(1e-15));
  CHECK(env->reward(Eigen::Vector2d(th, w), torque(u)) ==
        doctest::Approx(-(th * th + 0.1 * w * w + 0.001 * 4.0)));
  // Speed saturates at 8.
  CHECK(env->transition(Eigen::Vector2d(1.0, 7.9), torque(2.0))[1] == 8.0);
}

TEST_CASE("doubling map step") {
  const auto env = map(MapKind::kDoubling);
  CHECK(env->transition(Eigen::VectorXd::Constant(1, 0.2), torque(0.0))[0] ==
        doctest::Approx(0.4));
  CHECK(env->transition(Eigen::VectorXd::Constant(1, 0.7), torque(0.0))[0] ==
        doctest::Approx(0.4));
}

TEST_CASE("double pendulum: upright rest is an equilibrium") {
  EnvOptions o;
  o.id = EnvId::kDoublePendulum;
  const auto env = make_env(o);
  const Eigen::VectorXd up = Eigen::VectorXd::Zero(4);
  CHECK(env->transition(up, torque(0.0)) == up);
  CHECK(env->reward(up, torque(0.0)) == 0.0);
  CHECK_FALSE(env->is_terminal(up));
  CHECK(env->is_terminal(Eigen::Vector4d(kPi, kPi, 0, 0)));
}

TEST_CASE("double pendulum conserves energy without torque at small dt") {
  EnvOptions o;
  o.id = EnvId::kDoublePendulum;
  o.dt = 1e-5;
  const auto env = make_env(o);
  Eigen::VectorXd s(4);
  s << 0.4, -0.9, 1.0, -0.5;
  const double e0 = double_pendulum_energy(s);
  for (int i = 0; i < 100000; ++i) s = env->transition(s, torque(0.0));
  // One second of motion; a wrong mass matrix or force term drifts by O(1).
  CHECK(double_pendulum_energy(s) == doctest::Approx(e0).epsilon(1e-3));
}

TEST_CASE("dynamics respect the documented Lipschitz bounds") {
  std::vector<EnvOptions> all;
  for (EnvId id : {EnvId::kPendulumSwingup, EnvId::kDoublePendulum}) {
    EnvOptions o;
    o.id = id;
    all.push_back(o);
  }
  for (MapKind k : {MapKind::kDoubling, MapKind::kLogistic, MapKind::kContraction}) {
    EnvOptions o;
    o.id = EnvId::kMap1d;
    o.map = k;
    all.push_back(o);
  }
  for (const EnvOptions& o : all) {
    const auto env = make_env(o);
    Rng rng(7);
    const int n = env->state_dim();
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      Eigen::VectorXd s(n);
      Eigen::VectorXd d(n);
      if (o.id == EnvId::kMap1d) {
        s[0] = rng.uniform(0.001, 0.999);
      } else {
        const double vmax = o.id == EnvId::kPendulumSwingup ? 8.0 : 20.0;
        for (int k = 0; k < n; ++k) {
          s[k] = k < n / 2 ? rng.uniform(-kPi, kPi) : rng.uniform(-vmax, vmax);
        }
      }
      for (int k = 0; k < n; ++k) d[k] = rng.normal();
      d *= 1e-7 / d.norm();
      const Eigen::VectorXd a = torque(rng.uniform(-env->action_bound(),
                                                   env->action_bound()));
      const double ratio =
          env->state_delta(env->transition(s + d, a), env->transition(s, a))
              .norm() /
          d.norm();
      worst = std::max(worst, ratio);
    }
    CAPTURE(to_string(o.id));
    CHECK(worst <= env->lipschitz_bound() * (1.0 + 1e-6));
  }
}

TEST_CASE("step rejects wrong sizes and non-finite actions") {
  const auto env = pendulum();
  EnvState s = env->reset(1);
  CHECK_THROWS_AS(env->step(s, Eigen::VectorXd::Zero(2)), DimensionError);
  CHECK_THROWS_AS(env->step(s, torque(NAN)), NumericalError);
}

TEST_CASE("single-env venv matches step plus explicit reset bookkeeping") {
  const auto env = pendulum();
  VecEnv venv(env, 1, 9);
  EnvState ref = env->reset(mix_seed(9, 0));
  Rng actions(3);
  double ret = 0.0;
  for (int t = 0; t < 450; ++t) {
    const double u = actions.uniform(-2.0, 2.0);
    const VecStepResult v = venv.step(Eigen::MatrixXd::Constant(1, 1, u));
    const StepResult r = env->step(ref, torque(u));
    ret += r.reward;
    CHECK(v.rewards[0] == r.reward);
    CHECK(v.final_observations.col(0) == r.observation);
    CHECK(bool(v.truncated[0]) == r.truncated);
    if (r.truncated) {
      REQUIRE(v.completed_returns.size() == 1);
      CHECK(v.completed_returns[0] == doctest::Approx(ret).epsilon(1e-12));
      ret = 0.0;
      env->reset_in_place(ref);
    }
    CHECK(v.observations.col(0) == env->observe(ref.physical));
  }
}

TEST_CASE("venvs with the same seed and actions produce identical streams") {
  const auto env = pendulum();
  VecEnv a(env, 4, 5);
  VecEnv b(env, 4, 5);
  Rng rng(1);
  for (int t = 0; t < 300; ++t) {
    Eigen::MatrixXd u(1, 4);
    for (int e = 0; e < 4; ++e) u(0, e) = rng.uniform(-2, 2);
    const VecStepResult ra = a.step(u);
    const VecStepResult rb = b.step(u);
    CHECK(ra.observations == rb.observations);
    CHECK(ra.rewards == rb.rewards);
  }
}

TEST_CASE("pendulum venv truncates every env together at 200 steps") {
  VecEnv venv(pendulum(), 16, 0);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 16);
  for (int t = 1; t <= 200; ++t) {
    const VecStepResult r = venv.step(zero);
    for (int e = 0; e < 16; ++e) {
      CHECK(bool(r.truncated[e]) == (t == 200));
      CHECK_FALSE(r.terminated[e]);
    }
  }
}

TEST_CASE("venv serialization round-trips mid-episode") {
  VecEnv a(pendulum(), 3, 2);
  for (int t = 0; t < 37; ++t) a.step(Eigen::MatrixXd::Constant(1, 3, 0.3));
  VecEnv b(pendulum(), 3, 99);
  b.deserialize(a.serialize());
  CHECK(b.serialize() == a.serialize());
  for (int t = 0; t < 300; ++t) {
    const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(1, 3, -0.4);
    CHECK(a.step(u).observations == b.step(u).observations);
  }
}

TEST_CASE("unknown names are rejected") {
  CHECK_THROWS_AS(parse_env_id("cartpole"), ConfigError);
  CHECK_THROWS_AS(parse_map_kind("tent"), ConfigError);
  CHECK(parse_env_id(to_string(EnvId::kDoublePendulum)) == EnvId::kDoublePendulum);
}

}
