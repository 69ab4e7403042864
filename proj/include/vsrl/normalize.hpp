#ifndef VSRL_NORMALIZE_HPP_
#define VSRL_NORMALIZE_HPP_

#include <Eigen/Core>
#include <string>

namespace vsrl {

inline constexpr double kNormalizerEpsilon = 1e-8;
inline constexpr double kObservationClip = 10.0;

// Streaming count / mean / sum-of-squared-deviations (Welford).
struct RunningMoments {
  double count = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  explicit RunningMoments(Eigen::Index dim = 1)
      : mean(Eigen::VectorXd::Zero(dim)), m2(Eigen::VectorXd::Zero(dim)) {}

  // Population variance; zero before the first sample.
  Eigen::VectorXd variance() const;
  // Chan et al. parallel combination.
  void merge(const RunningMoments& other);

  std::string serialize() const;
  static RunningMoments deserialize(const std::string& text);
};

RunningMoments update_moments(RunningMoments moments,
                              const Eigen::VectorXd& sample);
void update_moments_in_place(RunningMoments& moments,
                             const Eigen::VectorXd& sample);

// (obs - mean) / sqrt(var + 1e-8), clipped to [-10, 10].
Eigen::VectorXd normalize_observation(const RunningMoments& moments,
                                      const Eigen::VectorXd& obs);

// Divides rewards by the running standard deviation of a per-env discounted
// return accumulator. The mean is never subtracted.
class RewardNormalizer {
 public:
  RewardNormalizer(int num_envs = 1, double gamma = 0.99);

  // Updates the accumulator and statistics with `reward`, returns the scaled
  // reward, and clears the accumulator when `done`.
  double normalize(int env_index, double reward, bool done);
  // Current divisor sqrt(var + 1e-8).
  double scale() const;

  const RunningMoments& moments() const { return moments_; }
  const Eigen::VectorXd& accumulators() const { return accumulators_; }
  double gamma() const { return gamma_; }

  std::string serialize() const;
  void deserialize(const std::string& text);

 private:
  double gamma_;
  Eigen::VectorXd accumulators_;
  RunningMoments moments_{1};
};

}  // namespace vsrl

#endif  // VSRL_NORMALIZE_HPP_
