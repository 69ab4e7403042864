#ifndef VSRL_OPTIM_HPP_
#define VSRL_OPTIM_HPP_

#include <Eigen/Core>
#include <cstdint>

namespace vsrl {

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step_count = 0;
  double learning_rate = 3e-4;
  double decay1 = 0.9;
  double decay2 = 0.999;
  double epsilon = 1e-8;

  static AdamState fresh(Eigen::Index size, double learning_rate);
};

// One bias-corrected Adam step, in place. Throws NumericalError on a
// non-finite gradient and DimensionError on length mismatch.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               const Eigen::Ref<const Eigen::VectorXd>& grad);

// Rescales `grad` to l2 norm `max_norm` when it is longer; otherwise returns
// it unchanged.
Eigen::VectorXd clip_grad_norm(const Eigen::Ref<const Eigen::VectorXd>& grad,
                               double max_norm);

}  // namespace vsrl

#endif  // VSRL_OPTIM_HPP_
