#include "tvsvm/deep_kernel_net.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "tvsvm/error.hpp"

namespace tvsvm {
namespace {

std::uint64_t next_stamp() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

std::string_view activation_name(Activation mode) {
  return mode == Activation::ExactLeakyRelu ? "exact" : "smoothed";
}

Activation parse_activation(std::string_view name) {
  if (name == "exact") return Activation::ExactLeakyRelu;
  if (name == "smoothed") return Activation::SmoothedLeakyRelu;
  throw InvalidArgument("unknown activation mode '" + std::string(name) +
                        "' (expected exact or smoothed)");
}

double leaky_relu(double t, double slope, Activation mode) {
  if (mode == Activation::ExactLeakyRelu) return t >= 0.0 ? t : slope * t;
  return slope * t + softplus((1.0 - slope) * t);
}

double leaky_relu_derivative(double t, double slope, Activation mode) {
  if (mode == Activation::ExactLeakyRelu) return t > 0.0 ? 1.0 : slope;
  return slope + (1.0 - slope) * logistic((1.0 - slope) * t);
}

Eigen::MatrixXd simplex_weights(const Eigen::MatrixXd& raw) {
  if (!raw.allFinite()) throw NumericalError("raw simplex weights are not finite");
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (Eigen::Index p = 0; p < raw.cols(); ++p) {
    const double m = raw.col(p).maxCoeff();
    out.col(p) = (raw.col(p).array() - m).exp();
    out.col(p) /= out.col(p).sum();
  }
  return out;
}

DeepKernelNet::DeepKernelNet(std::vector<int> layer_sizes, double leak_slope, Activation mode)
    : layer_sizes_(std::move(layer_sizes)), leak_slope_(leak_slope), mode_(mode) {
  if (layer_sizes_.empty()) throw InvalidArgument("kernel net needs at least one layer");
  for (int n : layer_sizes_)
    if (n < 1) throw InvalidArgument("kernel net layer sizes must be >= 1");
  if (layer_sizes_.back() != 1) throw InvalidArgument("kernel net must end in a single unit");
  if (!(leak_slope_ > 0.0 && leak_slope_ < 0.5))
    throw InvalidArgument("leak slope must lie in (0, 0.5)");
  for (std::size_t l = 1; l < layer_sizes_.size(); ++l)
    raw_.push_back(Eigen::MatrixXd::Zero(layer_sizes_[l - 1], layer_sizes_[l]));
  refresh();
}

DeepKernelNet DeepKernelNet::with_layers(int n_inputs, int combining_layers, int hidden_units,
                                         double leak_slope, Activation mode) {
  if (combining_layers < 0) throw InvalidArgument("number of combining layers must be >= 0");
  if (combining_layers == 0 && n_inputs != 1)
    throw InvalidArgument("a passthrough net accepts exactly one kernel");
  std::vector<int> sizes{n_inputs};
  for (int l = 1; l < combining_layers; ++l) sizes.push_back(hidden_units);
  if (combining_layers > 0) sizes.push_back(1);
  return DeepKernelNet(std::move(sizes), leak_slope, mode);
}

void DeepKernelNet::set_raw_weights(std::vector<Eigen::MatrixXd> raw) {
  if (raw.size() != raw_.size()) throw InvalidArgument("wrong number of weight layers");
  for (std::size_t l = 0; l < raw.size(); ++l) {
    if (raw[l].rows() != raw_[l].rows() || raw[l].cols() != raw_[l].cols())
      throw InvalidArgument("weight layer " + std::to_string(l) + " has the wrong shape");
    if (!raw[l].allFinite()) throw NumericalError("raw weights are not finite");
  }
  raw_ = std::move(raw);
  refresh();
}

void DeepKernelNet::apply_step(const std::vector<Eigen::MatrixXd>& grad, double step) {
  if (grad.size() != raw_.size()) throw InvalidArgument("wrong number of gradient layers");
  for (std::size_t l = 0; l < raw_.size(); ++l) raw_[l] -= step * grad[l];
  refresh();
}

void DeepKernelNet::refresh() {
  weights_.clear();
  for (const auto& r : raw_) weights_.push_back(simplex_weights(r));
  stamp_ = next_stamp();
}

MklResult mkl_forward(const DeepKernelNet& net, std::span<const double> kernel_values) {
  if (static_cast<int>(kernel_values.size()) != net.input_size())
    throw DimensionMismatch("kernel net expects " + std::to_string(net.input_size()) +
                            " inputs, got " + std::to_string(kernel_values.size()));
  MklResult r;
  r.tape.stamp = net.stamp();
  Vector a = Eigen::Map<const Vector>(kernel_values.data(), net.input_size());
  const double slope = net.leak_slope();
  for (const auto& w : net.weights()) {
    Vector pre = w.transpose() * a;
    r.tape.inputs.push_back(std::move(a));
    a.resize(pre.size());
    for (Eigen::Index p = 0; p < pre.size(); ++p) a[p] = leaky_relu(pre[p], slope, net.activation());
    r.tape.pre.push_back(std::move(pre));
  }
  r.output = a[0];
  r.tape.output = r.output;
  return r;
}

double mkl_output(const DeepKernelNet& net, std::span<const double> kernel_values) {
  return mkl_forward(net, kernel_values).output;
}

MklGradientAccumulator::MklGradientAccumulator(const DeepKernelNet& net) : net_(net) {
  for (const auto& w : net.weights()) grad_weights_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
}

void MklGradientAccumulator::add(const NetTape& tape, double upstream, std::span<double> grad_kv) {
  if (tape.stamp != net_.stamp()) throw InvalidArgument("stale tape: net weights changed since forward");
  const auto& weights = net_.weights();
  const std::size_t L = weights.size();
  if (tape.pre.size() != L || tape.inputs.size() != L)
    throw InvalidArgument("tape does not match the net layout");
  if (static_cast<int>(grad_kv.size()) != net_.input_size())
    throw DimensionMismatch("kernel gradient buffer has the wrong size");

  Vector grad_a = Vector::Constant(1, upstream);
  for (std::size_t k = L; k-- > 0;) {
    const Vector& pre = tape.pre[k];
    Vector grad_pre(pre.size());
    for (Eigen::Index p = 0; p < pre.size(); ++p)
      grad_pre[p] = grad_a[p] * leaky_relu_derivative(pre[p], net_.leak_slope(), net_.activation());
    grad_weights_[k].noalias() += tape.inputs[k] * grad_pre.transpose();
    grad_a = weights[k] * grad_pre;
  }
  for (std::size_t q = 0; q < grad_kv.size(); ++q) grad_kv[q] = grad_a[static_cast<Eigen::Index>(q)];
}

std::vector<Eigen::MatrixXd> MklGradientAccumulator::raw_gradient() const {
  // d beta_{q,p} / d raw_{r,p} = beta_{q,p} (delta_{qr} - beta_{r,p})
  std::vector<Eigen::MatrixXd> out;
  const auto& weights = net_.weights();
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Eigen::MatrixXd& beta = weights[l];
    const Eigen::MatrixXd& g = grad_weights_[l];
    Eigen::MatrixXd raw(beta.rows(), beta.cols());
    for (Eigen::Index p = 0; p < beta.cols(); ++p) {
      const double mean = beta.col(p).dot(g.col(p));
      raw.col(p) = beta.col(p).array() * (g.col(p).array() - mean);
    }
    out.push_back(std::move(raw));
  }
  return out;
}

MklGradient mkl_backward(const DeepKernelNet& net, const NetTape& tape, double upstream) {
  MklGradientAccumulator acc(net);
  MklGradient g;
  g.grad_kv = Vector::Zero(net.input_size());
  acc.add(tape, upstream, {g.grad_kv.data(), static_cast<std::size_t>(g.grad_kv.size())});
  g.grad_raw = acc.raw_gradient();
  return g;
}

}  // namespace tvsvm
