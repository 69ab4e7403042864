#include "vsrl/mlp.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>

#include "vsrl/errors.hpp"
#include "vsrl/rng.hpp"

namespace vsrl {

namespace {

using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

void check_params(const MlpSpec& spec, const ParamVector& params) {
  if (static_cast<std::size_t>(params.values.size()) != spec.parameter_count()) {
    throw DimensionError("parameter vector has " +
                         std::to_string(params.values.size()) +
                         " entries, network expects " +
                         std::to_string(spec.parameter_count()));
  }
}

void apply_activation(Activation act, Eigen::MatrixXd& z) {
  if (act == Activation::kTanh) z = z.array().tanh();
}

// Orthogonal rows x cols matrix scaled by gain.
Eigen::MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng) {
  const bool transpose = rows < cols;
  const int big = transpose ? cols : rows;
  const int small = transpose ? rows : cols;
  Eigen::MatrixXd a(big, small);
  for (int j = 0; j < small; ++j)
    for (int i = 0; i < big; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < small; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  q *= gain;
  if (transpose) return q.transpose();
  return q;
}

}  // namespace

std::vector<int> MlpSpec::layer_dims() const {
  std::vector<int> dims;
  dims.reserve(hidden_dims.size() + 2);
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(output_dim);
  return dims;
}

std::size_t MlpSpec::parameter_count() const {
  const auto dims = layer_dims();
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    count += static_cast<std::size_t>(dims[l] + 1) * dims[l + 1];
  }
  return count;
}

void MlpSpec::validate() const {
  for (int d : layer_dims()) {
    if (d <= 0) throw DimensionError("network layer widths must be positive");
  }
}

std::size_t output_bias_offset(const MlpSpec& spec) {
  return spec.parameter_count() - spec.output_dim;
}

ParamVector init_mlp(const MlpSpec& spec, std::uint64_t seed,
                     double head_gain) {
  spec.validate();
  Rng rng(seed);
  const auto dims = spec.layer_dims();
  ParamVector params{Eigen::VectorXd::Zero(spec.parameter_count())};
  std::size_t offset = 0;
  for (int l = 0; l < spec.num_layers(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const bool head = l + 1 == spec.num_layers();
    const double gain = head ? head_gain : std::sqrt(2.0);
    Eigen::Map<Eigen::MatrixXd>(params.values.data() + offset, fan_out,
                                fan_in) = orthogonal(fan_out, fan_in, gain, rng);
    offset += static_cast<std::size_t>(fan_in + 1) * fan_out;
  }
  return params;
}

Eigen::MatrixXd forward_batch(const MlpSpec& spec, const ParamVector& params,
                              const Eigen::MatrixXd& inputs, MlpTape* tape) {
  check_params(spec, params);
  if (inputs.rows() != spec.input_dim) {
    throw DimensionError("input has " + std::to_string(inputs.rows()) +
                         " rows, network expects " +
                         std::to_string(spec.input_dim));
  }
  const auto dims = spec.layer_dims();
  MlpTape local;
  MlpTape& t = tape ? *tape : local;
  t.activations.resize(dims.size());
  t.activations[0] = inputs;
  std::size_t offset = 0;
  for (int l = 0; l < spec.num_layers(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    ConstMatrixMap w(params.values.data() + offset, fan_out, fan_in);
    ConstVectorMap b(params.values.data() + offset + fan_in * fan_out,
                     fan_out);
    Eigen::MatrixXd& z = t.activations[l + 1];
    z.resize(fan_out, inputs.cols());
    z.noalias() = w * t.activations[l];
    z.colwise() += b;
    const bool head = l + 1 == spec.num_layers();
    apply_activation(head ? spec.output_activation : spec.hidden_activation,
                     z);
    offset += static_cast<std::size_t>(fan_in + 1) * fan_out;
  }
  return tape ? t.activations.back() : std::move(local.activations.back());
}

Gradient backward_batch(const MlpSpec& spec, const ParamVector& params,
                        const MlpTape& tape, const Eigen::MatrixXd& upstream) {
  check_params(spec, params);
  const auto dims = spec.layer_dims();
  if (tape.activations.size() != dims.size()) {
    throw DimensionError("tape does not match network depth");
  }
  const Eigen::Index n = tape.activations.front().cols();
  if (upstream.rows() != spec.output_dim || upstream.cols() != n) {
    throw DimensionError("upstream gradient shape does not match output");
  }
  Gradient grad{Eigen::VectorXd::Zero(params.values.size())};

  std::vector<std::size_t> offsets(spec.num_layers());
  std::size_t offset = 0;
  for (int l = 0; l < spec.num_layers(); ++l) {
    offsets[l] = offset;
    offset += static_cast<std::size_t>(dims[l] + 1) * dims[l + 1];
  }

  Eigen::MatrixXd delta = upstream;
  for (int l = spec.num_layers() - 1; l >= 0; --l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const bool head = l + 1 == spec.num_layers();
    const Activation act =
        head ? spec.output_activation : spec.hidden_activation;
    if (act == Activation::kTanh) {
      const Eigen::MatrixXd& y = tape.activations[l + 1];
      delta.array() *= 1.0 - y.array().square();
    }
    const Eigen::MatrixXd& x = tape.activations[l];
    Eigen::Map<Eigen::MatrixXd> dw(grad.values.data() + offsets[l], fan_out,
                                   fan_in);
    Eigen::Map<Eigen::VectorXd> db(
        grad.values.data() + offsets[l] + fan_in * fan_out, fan_out);
    dw.noalias() = delta * x.transpose();
    db = delta.rowwise().sum();
    if (l > 0) {
      ConstMatrixMap w(params.values.data() + offsets[l], fan_out, fan_in);
      delta = w.transpose() * delta;
    }
  }
  return grad;
}

Eigen::VectorXd forward(const MlpSpec& spec, const ParamVector& params,
                        const Eigen::VectorXd& input) {
  return forward_batch(spec, params, input).col(0);
}

ForwardBackward forward_backward(const MlpSpec& spec, const ParamVector& params,
                                 const Eigen::VectorXd& input,
                                 const Eigen::VectorXd& upstream_grad) {
  if (upstream_grad.size() != spec.output_dim) {
    throw DimensionError("upstream gradient length does not match output_dim");
  }
  MlpTape tape;
  Eigen::MatrixXd out = forward_batch(spec, params, input, &tape);
  Gradient grad = backward_batch(spec, params, tape, upstream_grad);
  return {out.col(0), std::move(grad)};
}

}  // namespace vsrl
