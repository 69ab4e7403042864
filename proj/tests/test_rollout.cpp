#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "vsrl/rollout.hpp"

using namespace vsrl;

namespace {

RolloutBatch crafted(int num_envs, int horizon) {
  RolloutBatch b;
  b.num_envs = num_envs;
  b.horizon = horizon;
  const int n = num_envs * horizon;
  b.rewards = Eigen::VectorXd::Zero(n);
  b.value_predictions = Eigen::VectorXd::Zero(n);
  b.bootstrap_values = Eigen::VectorXd::Zero(n);
  b.terminated.assign(n, 0);
  b.truncated.assign(n, 0);
  return b;
}

// Random batch with episode boundaries; bootstrap values wherever a segment
// ends without termination.
RolloutBatch random_batch(std::mt19937_64& gen, int num_envs, int horizon) {
  RolloutBatch b = crafted(num_envs, horizon);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> flag(0, 9);
  for (int i = 0; i < b.size(); ++i) {
    b.rewards[i] = u(gen);
    b.value_predictions[i] = u(gen);
    const int f = flag(gen);
    b.terminated[i] = f == 0;
    b.truncated[i] = f == 1;
  }
  for (int t = 0; t < horizon; ++t) {
    for (int e = 0; e < num_envs; ++e) {
      const int i = b.index(t, e);
      if (!b.terminated[i] && (b.truncated[i] || t + 1 == horizon)) {
        b.bootstrap_values[i] = u(gen);
      }
    }
  }
  return b;
}

}  // namespace

TEST_SUITE("rollout") {

TEST_CASE("lambda 0 gives one-step TD errors exactly") {
  std::mt19937_64 gen(1);
  const RolloutBatch b = random_batch(gen, 3, 20);
  const AdvantageEstimate a = compute_gae(b, GaeConfig{0.9, 0.0});
  for (int t = 0; t < b.horizon; ++t) {
    for (int e = 0; e < b.num_envs; ++e) {
      const int i = b.index(t, e);
      double next = 0.0;
      if (!b.terminated[i]) {
        next = (b.truncated[i] || t + 1 == b.horizon)
                   ? b.bootstrap_values[i]
                   : b.value_predictions[b.index(t + 1, e)];
      }
      const double delta = b.rewards[i] + 0.9 * next - b.value_predictions[i];
      CHECK(a.advantages[i] == delta);
    }
  }
}

TEST_CASE("single terminal step") {
  RolloutBatch b = crafted(1, 1);
  b.rewards[0] = 1.0;
  b.terminated[0] = 1;
  const AdvantageEstimate a = compute_gae(b, GaeConfig{});
  CHECK(a.advantages[0] == 1.0);
  CHECK(a.value_targets[0] == 1.0);
}

TEST_CASE("two-step stream, gamma 0.5, lambda 1") {
  RolloutBatch b = crafted(1, 2);
  b.rewards << 1.0, 0.0;
  AdvantageEstimate a = compute_gae(b, GaeConfig{0.5, 1.0});
  CHECK(a.advantages[0] == doctest::Approx(1.0));
  CHECK(a.advantages[1] == doctest::Approx(0.0));
  CHECK(a.value_targets[0] == doctest::Approx(1.0));
  CHECK(a.value_targets[1] == doctest::Approx(0.0));

  b.value_predictions << 0.2, 0.1;
  a = compute_gae(b, GaeConfig{0.5, 1.0});
  // deltas (0.85, -0.1)
  CHECK(a.advantages[0] == doctest::Approx(0.8));
  CHECK(a.advantages[1] == doctest::Approx(-0.1));
  CHECK(a.value_targets[0] == doctest::Approx(1.0));
  CHECK(a.value_targets[1] == doctest::Approx(0.0));
}

TEST_CASE("monte-carlo targets: geometric sums") {
  RolloutBatch b = crafted(1, 3);
  b.rewards.setOnes();
  const Eigen::VectorXd m = monte_carlo_targets(b, 0.5);
  CHECK(m[0] == doctest::Approx(1.75));

  RolloutBatch z = crafted(1, 4);
  z.bootstrap_values[3] = 3.0;
  const Eigen::VectorXd mz = monte_carlo_targets(z, 0.8);
  for (int t = 0; t < 4; ++t) {
    CHECK(mz[t] == doctest::Approx(std::pow(0.8, 4 - t) * 3.0));
  }
}

TEST_CASE("terminations cut the return, truncations bootstrap") {
  RolloutBatch b = crafted(1, 4);
  b.rewards << 1.0, 2.0, 4.0, 8.0;
  b.terminated[1] = 1;
  b.truncated[2] = 1;
  b.bootstrap_values[2] = 10.0;
  b.bootstrap_values[3] = 100.0;
  b.value_predictions << 5.0, 5.0, 5.0, 5.0;
  const AdvantageEstimate a = compute_gae(b, GaeConfig{0.5, 1.0});
  CHECK(a.value_targets[0] == doctest::Approx(1.0 + 0.5 * 2.0));
  CHECK(a.value_targets[1] == doctest::Approx(2.0));
  CHECK(a.value_targets[2] == doctest::Approx(4.0 + 0.5 * 10.0));
  CHECK(a.value_targets[3] == doctest::Approx(8.0 + 0.5 * 100.0));
}

TEST_CASE("GAE(1) agrees with the direct discounted sum") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const RolloutBatch b = random_batch(gen, 4, 64);
    const AdvantageEstimate a = compute_gae(b, GaeConfig{0.97, 1.0});
    const Eigen::VectorXd m = monte_carlo_targets(b, 0.97);
    CHECK((a.value_targets - m).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("advantage normalization") {
  std::mt19937_64 gen(2);
  const Eigen::VectorXd adv = vsrl::testing::gaussian_matrix(500, 1, gen, 4.0).array() + 3.0;
  const Eigen::VectorXd n = normalize_advantages(adv);
  CHECK(std::abs(n.mean()) < 1e-12);
  CHECK((n.array() - n.mean()).square().mean() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("collect_rollout") {
  const auto env = make_env(EnvOptions{});
  const GaussianPolicy policy = GaussianPolicy::create(MlpSpec{3, {16}, 1}, 4, 1.0);
  const MlpSpec vspec{3, {16}, 1};
  const ParamVector vparams = init_mlp(vspec, 5, 1.0);

  auto run = [&](std::uint64_t seed) {
    VecEnv venv(env, 16, seed);
    Normalizers norm(3, 16, 0.99, true, true);
    Rng rng(seed);
    RolloutBatch b = collect_rollout(policy, vspec, vparams, venv, 128, norm, rng);
    return std::make_pair(b, norm);
  };
  auto [batch, norm] = run(3);

  SUBCASE("shape") {
    CHECK(batch.size() == 2048);
    CHECK(batch.observations.cols() == 2048);
    CHECK(batch.actions.rows() == 1);
    CHECK(norm.observation.count == 2048.0);
  }
  SUBCASE("determinism") {
    auto [again, norm2] = run(3);
    CHECK(again.observations == batch.observations);
    CHECK(again.actions == batch.actions);
    CHECK(again.rewards == batch.rewards);
    CHECK(again.bootstrap_values == batch.bootstrap_values);
  }
  SUBCASE("stored quantities match recomputation") {
    const Eigen::VectorXd lp = evaluate_policy(policy, batch.observations, batch.actions).log_probs;
    CHECK((lp - batch.log_probs).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::MatrixXd v = forward_batch(vspec, vparams, batch.observations);
    CHECK((v.row(0).transpose() - batch.value_predictions).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("last step of every env bootstraps") {
    for (int e = 0; e < 16; ++e) {
      CHECK(batch.bootstrap_values[batch.index(127, e)] != 0.0);
    }
  }
}

}
