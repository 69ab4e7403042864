#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "vsrl/algorithms.hpp"
#include "vsrl/diagnostics.hpp"
#include "vsrl/errors.hpp"
#include "vsrl/rollout.hpp"

using namespace vsrl;

namespace {

// Rewards 1 on every step from a fixed state; never terminates.
class UnitRewardEnv final : public Env {
 public:
  int observation_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  int state_dim() const override { return 2; }
  int horizon() const override { return 10; }
  double dt() const override { return 1.0; }
  double action_bound() const override { return 1.0; }
  double lipschitz_bound() const override { return 1.0; }
  Eigen::VectorXd sample_initial(Rng& rng) const override {
    return Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
  }
  Eigen::VectorXd observe(const Eigen::VectorXd& s) const override { return s; }
  Eigen::VectorXd transition(const Eigen::VectorXd& s,
                             const Eigen::VectorXd&) const override {
    return 0.5 * s;
  }
  double reward(const Eigen::VectorXd&, const Eigen::VectorXd&) const override {
    return 1.0;
  }
  bool is_terminal(const Eigen::VectorXd&) const override { return false; }
  Eigen::VectorXd state_delta(const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) const override {
    return a - b;
  }
};

std::shared_ptr<const Env> map_env(MapKind kind) {
  EnvOptions o;
  o.id = EnvId::kMap1d;
  o.map = kind;
  return make_env(o);
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("ratio stats") {
  const Eigen::VectorXd lp = Eigen::Vector3d(-1.0, 0.5, 2.0);
  const RatioStats same = ratio_stats(lp, lp, 0.2);
  CHECK(same.max_ratio == 1.0);
  CHECK(same.min_ratio == 1.0);
  CHECK(same.clip_fraction == 0.0);

  const Eigen::Vector2d old(0.0, 0.0);
  const Eigen::Vector2d now(std::log(1.5), std::log(0.9));
  const RatioStats s = ratio_stats(old, now, 0.2);
  CHECK(s.max_ratio == doctest::Approx(1.5));
  CHECK(s.min_ratio == doctest::Approx(0.9));
  CHECK(s.clip_fraction == 0.5);

  std::mt19937_64 gen(1);
  const Eigen::VectorXd a = vsrl::testing::gaussian_matrix(200, 1, gen, 0.3);
  double previous = 1.0;
  for (double eps = 0.0; eps < 1.0; eps += 0.05) {
    const double f = ratio_stats(Eigen::VectorXd::Zero(200), a, eps).clip_fraction;
    CHECK(f <= previous);
    previous = f;
  }
}

TEST_CASE("effective horizon") {
  CHECK(effective_horizon(0.99) == 688);
  CHECK(effective_horizon(0.5) == 10);
  CHECK(effective_horizon(0.9999) == 1000);
}

TEST_CASE("eta: unit rewards with a zero critic approach 1 / (1 - gamma)") {
  UnitRewardEnv env;
  const GaussianPolicy policy = GaussianPolicy::create(MlpSpec{2, {4}, 1}, 1);
  const MlpSpec vspec{2, {4}, 1};
  const ParamVector zero{Eigen::VectorXd::Zero(vspec.parameter_count())};
  const Normalizers norm(2, 1, 0.5, false, false);
  Rng rng(3);
  const auto eta = value_estimation_error(policy, vspec, zero, env, norm, 0.5,
                                          5, 60, rng);
  for (double e : eta) CHECK(e == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("eta vanishes when the critic predicts the measured return") {
  const auto env = make_env(EnvOptions{});
  const GaussianPolicy policy = GaussianPolicy::create(MlpSpec{3, {8}, 1}, 2, 1.0);
  const MlpSpec vspec{3, {8}, 1};
  ParamVector critic{Eigen::VectorXd::Zero(vspec.parameter_count())};
  const Normalizers norm(3, 1, 0.99, false, false);
  Rng probe(9);
  const double measured =
      value_estimation_error(policy, vspec, critic, *env, norm, 0.99, 1, 300, probe)[0];
  critic.values[output_bias_offset(vspec)] = measured;
  Rng again(9);
  const double eta =
      value_estimation_error(policy, vspec, critic, *env, norm, 0.99, 1, 300, again)[0];
  CHECK(std::abs(eta) < 1e-9);
}

TEST_CASE("eta shifts by exactly -c when the output bias moves by c") {
  const auto env = make_env(EnvOptions{});
  const GaussianPolicy policy = GaussianPolicy::create(MlpSpec{3, {8}, 1}, 2, 1.0);
  const MlpSpec vspec{3, {8}, 1};
  ParamVector critic = init_mlp(vspec, 4, 1.0);
  const Normalizers norm(3, 1, 0.99, false, false);
  Rng r1(5);
  const auto base = value_estimation_error(policy, vspec, critic, *env, norm, 0.99, 6, 200, r1);
  const double c = 3.25;
  critic.values[output_bias_offset(vspec)] += c;
  Rng r2(5);
  const auto shifted = value_estimation_error(policy, vspec, critic, *env, norm, 0.99, 6, 200, r2);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(std::abs(shifted[i] - base[i] + c) < 1e-9);
  }
}

TEST_CASE("eta summary") {
  const EtaSummary s = summarize_eta({1.0, -3.0});
  CHECK(s.mean == -1.0);
  CHECK(s.abs_mean == 2.0);
  CHECK(s.std == 2.0);
}

TEST_CASE("lyapunov exponents of the 1-D maps") {
  Rng rng(1);
  const double ln2 = std::log(2.0);

  const auto doubling = map_env(MapKind::kDoubling);
  const double l_doubling =
      lyapunov_exponent(zero_action_dynamics(*doubling), env_delta(*doubling),
                        Eigen::VectorXd::Constant(1, 0.1234567), 2000, 1);
  CHECK(std::abs(l_doubling / ln2 - 1.0) <= 0.01);

  const auto contraction = map_env(MapKind::kContraction);
  const double l_contraction = lyapunov_exponent(
      zero_action_dynamics(*contraction), env_delta(*contraction),
      Eigen::VectorXd::Constant(1, 0.9), 200, 1);
  CHECK(std::abs(l_contraction / -ln2 - 1.0) <= 0.01);

  // Independent oracle: orbit average of log|f'(x)| = log|4 - 8x|.
  const auto logistic = map_env(MapKind::kLogistic);
  const int steps = 100000;
  double x = 0.3141;
  double oracle = 0.0;
  for (int i = 0; i < steps; ++i) {
    oracle += std::log(std::abs(4.0 - 8.0 * x));
    x = 4.0 * x * (1.0 - x);
  }
  oracle /= steps;
  const double l_logistic = lyapunov_exponent(
      zero_action_dynamics(*logistic), env_delta(*logistic),
      Eigen::VectorXd::Constant(1, 0.3141), steps, 1);
  CHECK(std::abs(oracle / ln2 - 1.0) <= 0.02);
  CHECK(std::abs(l_logistic / ln2 - 1.0) <= 0.02);
  CHECK(std::abs(l_logistic - oracle) <= 0.02 * ln2);
}

TEST_CASE("lyapunov rejects merged trajectories and bad arguments") {
  // Constant map: both trajectories land on the same point.
  const StateMap constant = [](const Eigen::VectorXd& s) {
    return Eigen::VectorXd::Zero(s.size());
  };
  const StateDelta diff = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return Eigen::VectorXd(a - b);
  };
  CHECK_THROWS_AS(lyapunov_exponent(constant, diff, Eigen::VectorXd::Ones(2), 10, 1),
                  NumericalError);
  CHECK_THROWS_AS(lyapunov_exponent(constant, diff, Eigen::VectorXd::Ones(2), 0, 1),
                  std::invalid_argument);
}

TEST_CASE("holder probe on synthetic objectives") {
  std::vector<double> scales;
  for (int i = 0; i <= 12; ++i) scales.push_back(std::pow(10.0, -0.5 * i));
  const Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd d = Eigen::Vector3d(1.0, 2.0, -2.0) / 3.0;
  for (double p : {0.3, 0.5, 0.7}) {
    const SlopeEstimate est = holder_exponent(
        [&](const Eigen::VectorXd& x) { return std::pow(std::abs(x.dot(d)), p); },
        theta, d, scales);
    CHECK(std::abs(est.alpha - p) <= 0.05);
  }
  const Eigen::VectorXd offset = Eigen::Vector3d(0.3, -1.0, 2.0);
  const SlopeEstimate lin = holder_exponent(
      [&](const Eigen::VectorXd& x) { return 4.0 * x.dot(d); }, offset, d, scales);
  CHECK(std::abs(lin.alpha - 1.0) <= 0.02);
  const SlopeEstimate scaled = holder_exponent(
      [&](const Eigen::VectorXd& x) { return 40.0 * x.dot(d); }, offset, d, scales);
  CHECK(scaled.alpha == doctest::Approx(lin.alpha).epsilon(1e-9));
  CHECK(scaled.intercept - lin.intercept == doctest::Approx(std::log(10.0)));
}

TEST_CASE("holder probe argument checks") {
  const Objective f = [](const Eigen::VectorXd& x) { return x.sum(); };
  CHECK_THROWS_AS(holder_exponent(f, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1),
                                  {1.0, 0.5, 0.2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(holder_exponent(f, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1),
                                  {1.0, 0.5, 0.2, 0.1}),
                  std::invalid_argument);
  // A flat objective leaves nothing to fit.
  const Objective flat = [](const Eigen::VectorXd&) { return 1.0; };
  CHECK_THROWS_AS(holder_exponent(flat, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1),
                                  {1.0, 0.1, 0.01, 0.001}),
                  NumericalError);
}

TEST_CASE("objective slices") {
  const auto env = make_env(EnvOptions{});
  const GaussianPolicy policy = GaussianPolicy::create(MlpSpec{3, {8}, 1}, 5, 1.0);
  const Normalizers norm(3, 1, 0.99, false, false);
  SliceOptions opts;
  opts.rollouts_per_point = 3;
  opts.seed = 17;
  std::mt19937_64 gen(2);
  Eigen::VectorXd d = vsrl::testing::gaussian_matrix(policy.mean_net.values.size(), 1, gen);
  d /= d.norm();

  SUBCASE("h = 0 reproduces the base objective") {
    const auto slice = objective_slice(policy, *env, norm, d, {-0.1, 0.0, 0.1}, opts);
    CHECK(slice[1].second == policy_objective(policy, *env, norm, opts));
  }
  SUBCASE("negated direction mirrors the grid") {
    const std::vector<double> grid{-0.2, -0.1, 0.0, 0.1, 0.2};
    const auto fwd = objective_slice(policy, *env, norm, d, grid, opts);
    const auto back = objective_slice(policy, *env, norm, -d, grid, opts);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(fwd[i].second == back[grid.size() - 1 - i].second);
    }
  }
  SUBCASE("zero-head policy equals zero-torque simulation") {
    const GaussianPolicy zero = GaussianPolicy::create(MlpSpec{3, {8}, 1}, 5, 0.0);
    double expected = 0.0;
    for (int i = 0; i < opts.rollouts_per_point; ++i) {
      EnvState s = env->reset(mix_seed(opts.seed, static_cast<std::uint64_t>(i)));
      for (int t = 0; t < env->horizon(); ++t) {
        expected += env->step(s, Eigen::VectorXd::Zero(1)).reward;
      }
    }
    expected /= opts.rollouts_per_point;
    const double j = policy_objective(zero, *env, norm, opts);
    CHECK(j == doctest::Approx(expected).epsilon(1e-14));
    CHECK(j == policy_objective(zero, *env, norm, opts));
  }
}

}
