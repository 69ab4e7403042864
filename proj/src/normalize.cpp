#include "vsrl/normalize.hpp"

#include <cmath>
#include <sstream>

#include "vsrl/errors.hpp"
#include "vsrl/textio.hpp"

namespace vsrl {

namespace {

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  out << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_real(v[i]);
}

Eigen::VectorXd read_vector(std::istream& in) {
  Eigen::Index n = 0;
  in >> n;
  if (!in || n < 0) throw IoError("malformed vector");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) in >> v[i];
  if (!in) throw IoError("truncated vector");
  return v;
}

}  // namespace

Eigen::VectorXd RunningMoments::variance() const {
  if (count <= 0.0) return Eigen::VectorXd::Zero(mean.size());
  return m2 / count;
}

void RunningMoments::merge(const RunningMoments& other) {
  if (other.count <= 0.0) return;
  if (count <= 0.0) {
    *this = other;
    return;
  }
  const double total = count + other.count;
  const Eigen::VectorXd delta = other.mean - mean;
  mean += delta * (other.count / total);
  m2 += other.m2 + delta.cwiseAbs2() * (count * other.count / total);
  count = total;
}

std::string RunningMoments::serialize() const {
  std::ostringstream out;
  out << format_real(count) << ' ';
  write_vector(out, mean);
  out << ' ';
  write_vector(out, m2);
  return out.str();
}

RunningMoments RunningMoments::deserialize(const std::string& text) {
  std::istringstream in(text);
  RunningMoments m;
  in >> m.count;
  m.mean = read_vector(in);
  m.m2 = read_vector(in);
  if (m.mean.size() != m.m2.size()) throw IoError("malformed moments");
  return m;
}

void update_moments_in_place(RunningMoments& moments,
                             const Eigen::VectorXd& sample) {
  if (sample.size() != moments.mean.size()) {
    throw DimensionError("moments: sample dimension mismatch");
  }
  moments.count += 1.0;
  const Eigen::VectorXd delta = sample - moments.mean;
  moments.mean += delta / moments.count;
  moments.m2.array() += delta.array() * (sample - moments.mean).array();
}

RunningMoments update_moments(RunningMoments moments,
                              const Eigen::VectorXd& sample) {
  update_moments_in_place(moments, sample);
  return moments;
}

Eigen::VectorXd normalize_observation(const RunningMoments& moments,
                                      const Eigen::VectorXd& obs) {
  const Eigen::ArrayXd denom =
      (moments.variance().array() + kNormalizerEpsilon).sqrt();
  return ((obs - moments.mean).array() / denom)
      .cwiseMax(-kObservationClip)
      .cwiseMin(kObservationClip)
      .matrix();
}

RewardNormalizer::RewardNormalizer(int num_envs, double gamma)
    : gamma_(gamma), accumulators_(Eigen::VectorXd::Zero(num_envs)) {}

double RewardNormalizer::normalize(int env_index, double reward, bool done) {
  double& acc = accumulators_[env_index];
  acc = gamma_ * acc + reward;
  update_moments_in_place(moments_, Eigen::VectorXd::Constant(1, acc));
  if (done) acc = 0.0;
  return reward / scale();
}

double RewardNormalizer::scale() const {
  return std::sqrt(moments_.variance()[0] + kNormalizerEpsilon);
}

std::string RewardNormalizer::serialize() const {
  std::ostringstream out;
  out << format_real(gamma_) << ' ';
  write_vector(out, accumulators_);
  out << ' ' << moments_.serialize();
  return out.str();
}

void RewardNormalizer::deserialize(const std::string& text) {
  std::istringstream in(text);
  in >> gamma_;
  accumulators_ = read_vector(in);
  std::string rest;
  std::getline(in, rest);
  moments_ = RunningMoments::deserialize(rest);
}

}  // namespace vsrl
