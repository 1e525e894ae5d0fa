#include "tvsvm/tv_svm.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "tvsvm/error.hpp"

namespace tvsvm {
namespace {

thread_local std::uint64_t t_decision_evals = 0;

double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// Support weights of every (kernel, support vector) pair, plus the value of
// each shift-invariant kernel at zero distance.
//
// When x is bitwise equal to z_j the neural path still sees a squared
// distance of order 1e-32 from exp/log rounding, which kernels with a cusp
// at zero (Laplacian, or Power and Log with p < 2) amplify into visible noise.
// Such pairs take the exact zero-distance value instead, and contribute no
// gradient to x or z: the derivative is zero for smooth kernels and the
// declared zero subgradient at a cusp.
struct EncodedSupport {
  std::vector<std::vector<SupportWeights>> weights;
  std::vector<std::optional<double>> self_value;
};

EncodedSupport encode_all(const TvSvmModel& m) {
  EncodedSupport enc;
  enc.weights.resize(m.kernels.size());
  for (std::size_t q = 0; q < m.kernels.size(); ++q) {
    enc.weights[q].reserve(static_cast<std::size_t>(m.num_support()));
    for (int j = 0; j < m.num_support(); ++j)
      enc.weights[q].push_back(detail::encode_support_unchecked(m.kernels[q], row_span(m.support, j)));
    std::optional<double> self;
    if (is_distance_based(m.kernels[q].family())) {
      const double zero = 0.0;
      self = kernel_forward(m.kernels[q], {&zero, 1}, {&zero, 1});
    }
    enc.self_value.push_back(self);
  }
  return enc;
}

bool same_point(std::span<const double> x, std::span<const double> z) {
  return std::equal(x.begin(), x.end(), z.begin(), z.end());
}

// Returns whether x coincides with z_j.
bool elementary_values(const TvSvmModel& m, const EncodedSupport& enc, std::span<const double> x,
                       int j, std::span<double> kv) {
  const bool same = same_point(x, row_span(m.support, j));
  for (std::size_t q = 0; q < m.kernels.size(); ++q)
    kv[q] = same && enc.self_value[q]
                ? *enc.self_value[q]
                : detail::neural_forward_unchecked(m.kernels[q], x, enc.weights[q][static_cast<std::size_t>(j)]);
  return same;
}

bool uses_histogram_kernel(const TvSvmModel& m) {
  return std::any_of(m.kernels.begin(), m.kernels.end(), [](const KernelSpec& k) {
    return k.family() == KernelFamily::HistogramIntersection;
  });
}

void check_input(const TvSvmModel& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.dim())
    throw DimensionMismatch("input has dimension " + std::to_string(x.size()) + ", model expects " +
                            std::to_string(m.dim()));
  for (double v : x)
    if (!std::isfinite(v)) throw DomainError("input has a non-finite entry");
  if (uses_histogram_kernel(m))
    for (double v : x)
      if (v < 0.0 || v > 1.0) throw DomainError("HistogramIntersection inputs must lie in [0, 1]");
}

void check_batch(const TvSvmModel& m, const RowMatrix& X, const Eigen::VectorXi& y, double C) {
  m.validate();
  if (X.rows() < 1) throw InvalidArgument("empty batch");
  if (y.size() != X.rows()) throw DimensionMismatch("label count does not match sample count");
  if (!(C > 0.0)) throw InvalidArgument("C must be > 0");
  for (Eigen::Index i = 0; i < X.rows(); ++i) check_input(m, row_span(X, i));
}

}  // namespace

void TvSvmModel::validate() const {
  if (support.rows() < 1) throw InvalidArgument("model needs at least one support vector");
  if (support.cols() < 1) throw InvalidArgument("support vectors must have dimension >= 1");
  if (!support.allFinite()) throw NumericalError("support vectors are not finite");
  if (alpha.rows() < 1 || alpha.cols() != support.rows())
    throw InvalidArgument("alpha must be heads x N");
  if (!alpha.allFinite()) throw NumericalError("alpha is not finite");
  if (bias.size() != alpha.rows()) throw InvalidArgument("bias must have one entry per head");
  if (!bias.allFinite()) throw NumericalError("bias is not finite");
  if (kernels.empty()) throw InvalidArgument("model needs at least one elementary kernel");
  if (net.input_size() != static_cast<int>(kernels.size()))
    throw InvalidArgument("kernel net expects " + std::to_string(net.input_size()) +
                          " inputs but the model has " + std::to_string(kernels.size()) + " kernels");
  if (classes.empty()) {
    if (alpha.rows() != 1) throw InvalidArgument("binary model must have exactly one head");
  } else {
    if (classes.size() < 2) throw InvalidArgument("multiclass model needs at least two classes");
    if (static_cast<Eigen::Index>(classes.size()) != alpha.rows())
      throw InvalidArgument("multiclass model needs one head per class");
  }
}

double combined_kernel(const TvSvmModel& model, std::span<const double> x, std::span<const double> z) {
  std::vector<double> kv(model.kernels.size());
  const bool same = same_point(x, z);
  for (std::size_t q = 0; q < model.kernels.size(); ++q)
    kv[q] = same && is_distance_based(model.kernels[q].family())
                ? kernel_forward(model.kernels[q], x, z)
                : neural_forward(model.kernels[q], x, encode_support(model.kernels[q], z));
  return mkl_output(model.net, kv);
}

Vector decision_scores(const TvSvmModel& model, std::span<const double> x) {
  model.validate();
  check_input(model, x);
  const auto enc = encode_all(model);
  std::vector<double> kv(model.kernels.size());
  Vector k(model.num_support());
  for (int j = 0; j < model.num_support(); ++j) {
    elementary_values(model, enc, x, j, kv);
    k[j] = mkl_output(model.net, kv);
  }
  t_decision_evals += static_cast<std::uint64_t>(model.num_support());
  return model.alpha * k + model.bias;
}

double decision(const TvSvmModel& model, std::span<const double> x, int head) {
  if (head < 0 || head >= model.num_heads()) throw InvalidArgument("head index out of range");
  return decision_scores(model, x)[head];
}

int predict(const TvSvmModel& model, std::span<const double> x) {
  if (model.is_multiclass()) throw InvalidArgument("predict() needs a binary model");
  return decision(model, x) >= 0.0 ? 1 : -1;
}

int predict_multiclass(const TvSvmModel& model, std::span<const double> x) {
  if (!model.is_multiclass()) throw InvalidArgument("predict_multiclass() needs a multiclass model");
  const Vector s = decision_scores(model, x);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < s.size(); ++k)
    if (s[k] > s[best]) best = k;
  return model.classes[static_cast<std::size_t>(best)];
}

int predict_label(const TvSvmModel& model, std::span<const double> x) {
  return model.is_multiclass() ? predict_multiclass(model, x) : predict(model, x);
}

double accuracy(const TvSvmModel& model, const RowMatrix& X, const Eigen::VectorXi& y) {
  if (X.rows() == 0 || y.size() != X.rows()) throw InvalidArgument("accuracy needs matching, non-empty X and y");
  int correct = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) correct += predict_label(model, row_span(X, i)) == y[i];
  return static_cast<double>(correct) / static_cast<double>(X.rows());
}

Eigen::MatrixXd head_targets(const TvSvmModel& model, const Eigen::VectorXi& y) {
  Eigen::MatrixXd t(y.size(), model.num_heads());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!model.is_multiclass()) {
      if (y[i] != -1 && y[i] != 1)
        throw InvalidArgument("binary labels must be -1 or +1, got " + std::to_string(y[i]));
      t(i, 0) = y[i];
      continue;
    }
    const auto it = std::find(model.classes.begin(), model.classes.end(), y[i]);
    if (it == model.classes.end()) throw InvalidArgument("label " + std::to_string(y[i]) + " is not a model class");
    const auto c = it - model.classes.begin();
    for (Eigen::Index k = 0; k < t.cols(); ++k) t(i, k) = k == c ? 1.0 : -1.0;
  }
  return t;
}

ObjectiveBreakdown objective(const TvSvmModel& model, const RowMatrix& X, const Eigen::VectorXi& y,
                             double C, double loss_scale) {
  check_batch(model, X, y, C);
  const Eigen::MatrixXd targets = head_targets(model, y);
  const auto enc = encode_all(model);
  const int N = model.num_support();
  std::vector<double> kv(model.kernels.size());

  Eigen::MatrixXd Kx(X.rows(), N);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (int j = 0; j < N; ++j) {
      elementary_values(model, enc, row_span(X, i), j, kv);
      Kx(i, j) = mkl_output(model.net, kv);
    }
  Eigen::MatrixXd Kz(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      elementary_values(model, enc, row_span(model.support, i), j, kv);
      Kz(i, j) = mkl_output(model.net, kv);
    }

  ObjectiveBreakdown out;
  for (int k = 0; k < model.num_heads(); ++k)
    out.regularizer += 0.5 * model.alpha.row(k).dot(Kz * model.alpha.row(k).transpose());
  const Eigen::MatrixXd F = (Kx * model.alpha.transpose()).rowwise() + model.bias.transpose();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < F.rows(); ++i)
    for (Eigen::Index k = 0; k < F.cols(); ++k) loss += softplus(1.0 - targets(i, k) * F(i, k));
  out.loss = loss_scale * C * loss;
  out.total = out.regularizer + out.loss;
  return out;
}

ModelGradient gradients(const TvSvmModel& model, const RowMatrix& X, const Eigen::VectorXi& y,
                        double C, double loss_scale) {
  check_batch(model, X, y, C);
  const Eigen::MatrixXd targets = head_targets(model, y);
  const auto enc = encode_all(model);
  const int N = model.num_support();
  const int D = model.dim();
  const auto n = X.rows();
  const std::size_t Q = model.kernels.size();
  std::vector<double> kv(Q);

  std::vector<NetTape> tapes_x(static_cast<std::size_t>(n * N));
  std::vector<NetTape> tapes_z(static_cast<std::size_t>(N) * N);
  std::vector<char> same_x(static_cast<std::size_t>(n * N)), same_z(static_cast<std::size_t>(N) * N);
  Eigen::MatrixXd Kx(n, N), Kz(N, N);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < N; ++j) {
      same_x[static_cast<std::size_t>(i * N + j)] = elementary_values(model, enc, row_span(X, i), j, kv);
      auto r = mkl_forward(model.net, kv);
      Kx(i, j) = r.output;
      tapes_x[static_cast<std::size_t>(i * N + j)] = std::move(r.tape);
    }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      same_z[static_cast<std::size_t>(i) * N + j] = elementary_values(model, enc, row_span(model.support, i), j, kv);
      auto r = mkl_forward(model.net, kv);
      Kz(i, j) = r.output;
      tapes_z[static_cast<std::size_t>(i) * N + j] = std::move(r.tape);
    }

  ModelGradient g;
  const Eigen::MatrixXd F = (Kx * model.alpha.transpose()).rowwise() + model.bias.transpose();
  Eigen::MatrixXd dF(n, model.num_heads());  // d objective / d f_k(x_i)
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < model.num_heads(); ++k) {
      const double margin = 1.0 - targets(i, k) * F(i, k);
      loss += softplus(margin);
      dF(i, k) = -loss_scale * C * targets(i, k) * logistic(margin);
    }
  for (int k = 0; k < model.num_heads(); ++k)
    g.objective.regularizer += 0.5 * model.alpha.row(k).dot(Kz * model.alpha.row(k).transpose());
  g.objective.loss = loss_scale * C * loss;
  g.objective.total = g.objective.regularizer + g.objective.loss;

  const Eigen::MatrixXd Ksym = 0.5 * (Kz + Kz.transpose());
  g.alpha = dF.transpose() * Kx + model.alpha * Ksym;
  g.bias = dF.colwise().sum().transpose();

  // Upstream gradients on each combined kernel value.
  const Eigen::MatrixXd Ux = dF * model.alpha;
  const Eigen::MatrixXd Uz = 0.5 * model.alpha.transpose() * model.alpha;

  MklGradientAccumulator acc(model.net);
  Vector gkv(static_cast<Eigen::Index>(Q));
  const std::span<double> gkv_span{gkv.data(), Q};
  const bool want_support = !model.frozen_support;
  g.support = RowMatrix::Zero(N, D);
  std::vector<std::vector<Vector>> grad_omega(Q, std::vector<Vector>(static_cast<std::size_t>(N), Vector::Zero(D)));
  Vector discard(D);

  auto backprop_pair = [&](const NetTape& tape, double upstream, std::span<const double> x, int j, bool same,
                           std::span<double> grad_x) {
    if (upstream == 0.0) return;
    acc.add(tape, upstream, gkv_span);
    if (!want_support) return;
    for (std::size_t q = 0; q < Q; ++q) {
      if (same && enc.self_value[q]) continue;
      auto& go = grad_omega[q][static_cast<std::size_t>(j)];
      detail::neural_backward_accumulate(model.kernels[q], x, enc.weights[q][static_cast<std::size_t>(j)], gkv[static_cast<Eigen::Index>(q)],
                                         CuspPolicy::ZeroSubgradient, grad_x,
                                         {go.data(), static_cast<std::size_t>(D)});
    }
  };

  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < N; ++j) {
      discard.setZero();
      backprop_pair(tapes_x[static_cast<std::size_t>(i * N + j)], Ux(i, j), row_span(X, i), j,
                    same_x[static_cast<std::size_t>(i * N + j)], {discard.data(), static_cast<std::size_t>(D)});
    }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      backprop_pair(tapes_z[static_cast<std::size_t>(i) * N + j], Uz(i, j), row_span(model.support, i), j,
                    same_z[static_cast<std::size_t>(i) * N + j], row_span(g.support, i));

  if (want_support) {
    for (std::size_t q = 0; q < Q; ++q)
      for (int j = 0; j < N; ++j)
        g.support.row(j) +=
            support_backward(model.kernels[q], row_span(model.support, j), grad_omega[q][static_cast<std::size_t>(j)])
                .transpose();
  }
  g.raw_weights = acc.raw_gradient();
  return g;
}

std::uint64_t decision_kernel_evaluations() { return t_decision_evals; }

}  // namespace tvsvm
