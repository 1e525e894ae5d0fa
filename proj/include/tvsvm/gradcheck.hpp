#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tvsvm/tv_svm.hpp"

namespace tvsvm {

struct GradcheckOptions {
  double step = 1e-6;
  double tolerance = 1e-5;
  // Negative control: perturbs the analytic gradient before comparing.
  bool corrupt = false;
};

struct GradcheckResult {
  bool passed = false;
  double max_error = 0.0;
  std::string worst_parameter;
  int parameters = 0;
};

// Compares gradients() against central differences of objective().total on
// every parameter. The error of one component is
// |analytic - numeric| / max(1, |analytic|, |numeric|). A frozen model must
// report an exactly zero support gradient.
GradcheckResult check_gradients(const TvSvmModel& model, const RowMatrix& X, const Eigen::VectorXi& y, double C,
                                const GradcheckOptions& options = {});

// Hyperparameters drawn from ranges where every family is well conditioned.
KernelSpec random_kernel_spec(KernelFamily family, std::uint64_t seed);

struct GradcheckInstance {
  TvSvmModel model;
  RowMatrix X;
  Eigen::VectorXi y;
  double C = 1.0;
};

// A small random problem (N <= 5, D <= 4, n <= 10) with random
// parameters, and a three-class problem one time in four. Sampled points
// stay at least 0.05 apart, keeping central differences well conditioned
// near the cusps some distance kernels have at zero.
GradcheckInstance random_gradcheck_instance(const std::vector<KernelSpec>& kernels, int mkl_layers, bool frozen,
                                            Activation activation, std::uint64_t seed, int hidden_units = 4);

}  // namespace tvsvm
