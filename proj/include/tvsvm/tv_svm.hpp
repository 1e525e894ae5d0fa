#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tvsvm/data_io.hpp"
#include "tvsvm/deep_kernel_net.hpp"
#include "tvsvm/kernel.hpp"
#include "tvsvm/types.hpp"

namespace tvsvm {

// Total variation SVM: f(x) = sum_j alpha_j k(x, z_j) + b where the virtual
// support vectors z_j are free parameters and k is the output of the deep
// kernel net fed with the elementary kernels.
//
// A binary model has one head and no class list; labels are -1/+1. A
// multiclass model has one (alpha, b) head per entry of `classes`, all heads
// sharing the support vectors and the kernel net (one-vs-rest).
struct TvSvmModel {
  RowMatrix support;       // N x D
  Eigen::MatrixXd alpha;   // heads x N
  Vector bias;             // heads
  std::vector<KernelSpec> kernels;
  DeepKernelNet net;
  bool frozen_support = false;
  std::vector<int> classes;
  FeatureTransform input_transform;

  int num_support() const { return static_cast<int>(support.rows()); }
  int dim() const { return static_cast<int>(support.cols()); }
  int num_heads() const { return static_cast<int>(alpha.rows()); }
  bool is_multiclass() const { return !classes.empty(); }
  void validate() const;
};

struct ObjectiveBreakdown {
  double regularizer = 0.0;
  double loss = 0.0;
  double total = 0.0;
};

struct ModelGradient {
  Eigen::MatrixXd alpha;
  Vector bias;
  RowMatrix support;
  std::vector<Eigen::MatrixXd> raw_weights;
  ObjectiveBreakdown objective;
};

// Combined kernel value between an input and a point, through the
// activation decomposition of each elementary kernel and the net.
double combined_kernel(const TvSvmModel& model, std::span<const double> x, std::span<const double> z);

// Score of one head.
double decision(const TvSvmModel& model, std::span<const double> x, int head = 0);
Vector decision_scores(const TvSvmModel& model, std::span<const double> x);

// Binary prediction; sign(0) = +1.
int predict(const TvSvmModel& model, std::span<const double> x);
// Class of the highest-scoring head, ties to the lowest index.
int predict_multiclass(const TvSvmModel& model, std::span<const double> x);
// predict or predict_multiclass depending on the model.
int predict_label(const TvSvmModel& model, std::span<const double> x);

double accuracy(const TvSvmModel& model, const RowMatrix& X, const Eigen::VectorXi& y);

// Per-head +-1 targets (n x heads) for the given labels.
Eigen::MatrixXd head_targets(const TvSvmModel& model, const Eigen::VectorXi& y);

// 1/2 sum_k sum_{i,j} alpha_ki alpha_kj k(z_i, z_j)
//   + loss_scale * C * sum_k sum_i log(1 + exp(1 - y_ik f_k(x_i))).
//
// loss_scale = n / |batch| makes a mini-batch objective an unbiased estimate
// of the full one.
ObjectiveBreakdown objective(const TvSvmModel& model, const RowMatrix& X, const Eigen::VectorXi& y,
                             double C, double loss_scale = 1.0);

// Analytic gradient of objective().total w.r.t. alpha, bias, support vectors
// (zero when frozen) and raw net weights.
ModelGradient gradients(const TvSvmModel& model, const RowMatrix& X, const Eigen::VectorXi& y,
                        double C, double loss_scale = 1.0);

// Number of (input, support vector) kernel evaluations performed so far by
// this thread through decision().
std::uint64_t decision_kernel_evaluations();

}  // namespace tvsvm
