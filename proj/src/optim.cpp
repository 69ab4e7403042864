#include "vsrl/optim.hpp"

#include <cmath>

#include "vsrl/errors.hpp"

namespace vsrl {

AdamState AdamState::fresh(Eigen::Index size, double learning_rate) {
  AdamState state;
  state.first_moment = Eigen::VectorXd::Zero(size);
  state.second_moment = Eigen::VectorXd::Zero(size);
  state.learning_rate = learning_rate;
  return state;
}

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               const Eigen::Ref<const Eigen::VectorXd>& grad) {
  if (grad.size() != params.size() ||
      state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw DimensionError("adam: parameter, gradient and moment lengths differ");
  }
  if (!grad.allFinite()) {
    throw NumericalError("adam: non-finite gradient (training diverged)");
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  state.first_moment =
      state.decay1 * state.first_moment + (1.0 - state.decay1) * grad;
  state.second_moment = state.decay2 * state.second_moment +
                        (1.0 - state.decay2) * grad.cwiseAbs2();
  const double correction1 = 1.0 - std::pow(state.decay1, t);
  const double correction2 = 1.0 - std::pow(state.decay2, t);
  params.array() -=
      state.learning_rate * (state.first_moment.array() / correction1) /
      ((state.second_moment.array() / correction2).sqrt() + state.epsilon);
}

Eigen::VectorXd clip_grad_norm(const Eigen::Ref<const Eigen::VectorXd>& grad,
                               double max_norm) {
  const double norm = grad.norm();
  if (norm <= max_norm) return grad;
  return grad * (max_norm / norm);
}

}  // namespace vsrl
