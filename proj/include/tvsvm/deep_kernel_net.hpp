#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tvsvm/types.hpp"

namespace tvsvm {

enum class Activation {
  // g(t) = max(a t, t)
  ExactLeakyRelu,
  // g(t) = a t + log(1 + exp((1 - a) t))
  SmoothedLeakyRelu,
};

std::string_view activation_name(Activation mode);
Activation parse_activation(std::string_view name);

double leaky_relu(double t, double slope, Activation mode);
double leaky_relu_derivative(double t, double slope, Activation mode);

// Column-wise softmax. Each column of the result lies on the simplex.
Eigen::MatrixXd simplex_weights(const Eigen::MatrixXd& raw);

// Layered combiner of elementary kernel values.
//
// layer_sizes = {n_1, ..., n_L} with n_L = 1. Unit p of layer l computes
// g(sum_q beta_{q,p} k_q^{l-1}) where column p of beta is the softmax of the
// unconstrained raw weights. A single-entry layout {1} is a passthrough that
// returns its one input kernel unchanged.
//
// Every mutation of the raw weights issues a fresh stamp, which tapes use to
// detect that they were recorded against other weights.
class DeepKernelNet {
 public:
  DeepKernelNet() : DeepKernelNet(std::vector<int>{1}) {}
  explicit DeepKernelNet(std::vector<int> layer_sizes, double leak_slope = 0.01,
                         Activation mode = Activation::ExactLeakyRelu);

  // {n_inputs, hidden..., 1} from a count of combining layers, each hidden
  // layer having `hidden_units` units. Zero layers is the passthrough.
  static DeepKernelNet with_layers(int n_inputs, int combining_layers, int hidden_units = 8,
                                   double leak_slope = 0.01,
                                   Activation mode = Activation::ExactLeakyRelu);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int input_size() const { return layer_sizes_.front(); }
  int combining_layers() const { return static_cast<int>(raw_.size()); }
  double leak_slope() const { return leak_slope_; }
  Activation activation() const { return mode_; }
  void set_activation(Activation mode) { mode_ = mode; }

  const std::vector<Eigen::MatrixXd>& raw_weights() const { return raw_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  void set_raw_weights(std::vector<Eigen::MatrixXd> raw);
  // raw -= step * grad, layer by layer.
  void apply_step(const std::vector<Eigen::MatrixXd>& grad, double step);

  std::uint64_t stamp() const { return stamp_; }

 private:
  void refresh();

  std::vector<int> layer_sizes_;
  std::vector<Eigen::MatrixXd> raw_;
  std::vector<Eigen::MatrixXd> weights_;
  double leak_slope_;
  Activation mode_;
  std::uint64_t stamp_ = 0;
};

// Activations recorded by a forward pass.
struct NetTape {
  std::uint64_t stamp = 0;
  // inputs[l] feeds combining layer l; pre[l] is its pre-activation.
  std::vector<Vector> inputs;
  std::vector<Vector> pre;
  double output = 0.0;
};

struct MklResult {
  double output;
  NetTape tape;
};

MklResult mkl_forward(const DeepKernelNet& net, std::span<const double> kernel_values);
double mkl_output(const DeepKernelNet& net, std::span<const double> kernel_values);

struct MklGradient {
  std::vector<Eigen::MatrixXd> grad_raw;
  Vector grad_kv;
};

MklGradient mkl_backward(const DeepKernelNet& net, const NetTape& tape, double upstream);

// Accumulates gradients over many forward tapes of one net. Gradients are
// summed w.r.t. the derived simplex weights and mapped through the softmax
// Jacobian once, in raw_gradient().
class MklGradientAccumulator {
 public:
  explicit MklGradientAccumulator(const DeepKernelNet& net);

  // Adds upstream * d(output)/d(weights) for this tape and writes
  // upstream * d(output)/d(kernel_values) into grad_kv.
  void add(const NetTape& tape, double upstream, std::span<double> grad_kv);

  std::vector<Eigen::MatrixXd> raw_gradient() const;

 private:
  const DeepKernelNet& net_;
  std::vector<Eigen::MatrixXd> grad_weights_;
};

}  // namespace tvsvm
