#ifndef VSRL_MLP_HPP_
#define VSRL_MLP_HPP_

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace vsrl {

enum class Activation { kTanh, kIdentity };

// Shape of a fully connected network. Samples are stored as matrix columns
// everywhere in this library: a batch of N inputs is an input_dim x N matrix.
struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_dims{64, 64};
  int output_dim = 1;
  Activation hidden_activation = Activation::kTanh;
  Activation output_activation = Activation::kIdentity;

  // input_dim, hidden_dims..., output_dim
  std::vector<int> layer_dims() const;
  int num_layers() const { return static_cast<int>(hidden_dims.size()) + 1; }
  std::size_t parameter_count() const;
  // Throws DimensionError on non-positive widths.
  void validate() const;

  bool operator==(const MlpSpec&) const = default;
};

// Flat weights of one network. Per layer: the fan_out x fan_in weight matrix
// in column-major order, followed by the fan_out biases.
struct ParamVector {
  Eigen::VectorXd values;
};

struct Gradient {
  Eigen::VectorXd values;
};

// Activations recorded by a batched forward pass; layer 0 is the input.
struct MlpTape {
  std::vector<Eigen::MatrixXd> activations;

  const Eigen::MatrixXd& output() const { return activations.back(); }
};

// Orthogonal weights (gain sqrt(2) on hidden layers, `head_gain` on the
// output layer) and zero biases. Deterministic in (spec, seed, head_gain).
ParamVector init_mlp(const MlpSpec& spec, std::uint64_t seed, double head_gain);

Eigen::VectorXd forward(const MlpSpec& spec, const ParamVector& params,
                        const Eigen::VectorXd& input);

struct ForwardBackward {
  Eigen::VectorXd output;
  Gradient grad;
};

// Output plus the gradient of <output, upstream_grad> w.r.t. params.
ForwardBackward forward_backward(const MlpSpec& spec, const ParamVector& params,
                                 const Eigen::VectorXd& input,
                                 const Eigen::VectorXd& upstream_grad);

// Batched forward over the columns of `inputs`; fills `tape` when given.
Eigen::MatrixXd forward_batch(const MlpSpec& spec, const ParamVector& params,
                              const Eigen::MatrixXd& inputs,
                              MlpTape* tape = nullptr);

// Gradient of sum_n <output_n, upstream_n> given a tape from forward_batch.
Gradient backward_batch(const MlpSpec& spec, const ParamVector& params,
                        const MlpTape& tape, const Eigen::MatrixXd& upstream);

// Offset of the output layer's bias block inside a ParamVector.
std::size_t output_bias_offset(const MlpSpec& spec);

}  // namespace vsrl

#endif  // VSRL_MLP_HPP_
