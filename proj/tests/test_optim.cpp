#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "vsrl/errors.hpp"
#include "vsrl/optim.hpp"

using namespace vsrl;

TEST_SUITE("optim") {

TEST_CASE("zero gradient leaves parameters unchanged") {
  AdamState s = AdamState::fresh(3, 0.1);
  Eigen::VectorXd w(3);
  w << 1, -2, 3;
  const Eigen::VectorXd before = w;
  adam_step(s, w, Eigen::VectorXd::Zero(3));
  CHECK(w == before);
  CHECK(s.step_count == 1);
}

TEST_CASE("first step on w^2 from w = 1") {
  AdamState s = AdamState::fresh(1, 0.1);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
  const double g = 2.0 * w[0];
  // Bias-corrected moments at t = 1 are g and g^2 exactly.
  const double expected = 1.0 - 0.1 * g / (std::sqrt(g * g) + 1e-8);
  adam_step(s, w, Eigen::VectorXd::Constant(1, g));
  CHECK(w[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(w[0] == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("step-1 displacement scales with the learning rate") {
  Eigen::VectorXd g(4);
  g << 0.3, -7.0, 1e-3, 2.0;
  AdamState a = AdamState::fresh(4, 1e-3);
  AdamState b = AdamState::fresh(4, 4e-3);
  Eigen::VectorXd wa = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd wb = Eigen::VectorXd::Zero(4);
  adam_step(a, wa, g);
  adam_step(b, wb, g);
  for (int i = 0; i < 4; ++i) CHECK(wb[i] / wa[i] == doctest::Approx(4.0));
}

TEST_CASE("adam matches a scalar reference over several steps") {
  AdamState s = AdamState::fresh(1, 0.05);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(1, 3.0);
  double ref = 3.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 25; ++t) {
    const double g = 2.0 * ref - 1.0;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    ref -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
    adam_step(s, w, Eigen::VectorXd::Constant(1, 2.0 * w[0] - 1.0));
  }
  CHECK(w[0] == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("adam rejects non-finite gradients and length mismatch") {
  AdamState s = AdamState::fresh(2, 0.1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(adam_step(s, w, Eigen::Vector2d(1.0, NAN)), NumericalError);
  CHECK_THROWS_AS(adam_step(s, w, Eigen::VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("gradient clipping") {
  CHECK(clip_grad_norm(Eigen::Vector2d(0.3, 0.4), 1.0) ==
        Eigen::VectorXd(Eigen::Vector2d(0.3, 0.4)));
  const Eigen::VectorXd c = clip_grad_norm(Eigen::Vector2d(3, 4), 1.0);
  CHECK(c[0] == doctest::Approx(0.6));
  CHECK(c[1] == doctest::Approx(0.8));
  std::mt19937_64 gen(5);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd g = vsrl::testing::gaussian_matrix(10, 1, gen, 10.0);
    CHECK(clip_grad_norm(g, 1.0).norm() <= 1.0 + 1e-12);
  }
}

}
