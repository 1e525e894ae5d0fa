#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tvsvm/data_io.hpp"
#include "tvsvm/tv_svm.hpp"

namespace tvsvm {

enum class InitStrategy { SubsampleJitter, KMeans, UniformRandom };

std::string_view init_strategy_name(InitStrategy s);
InitStrategy parse_init_strategy(std::string_view name);

struct TrainConfig {
  double C = 1.0;
  int num_support = 10;
  int epochs = 1000;
  int batch_size = 50;
  double lr0 = 0.01;
  double lr_decay = 0.99;
  double lr_min = 1e-6;
  double lr_max = 1.0;
  std::uint64_t seed = 0;
  InitStrategy init = InitStrategy::SubsampleJitter;
  // Jitter added to subsampled rows, as a multiple of each dimension's
  // standard deviation. Unset means 0.01, or 0 when the support is frozen.
  std::optional<double> jitter_scale;
  bool freeze_support = false;
  std::vector<KernelSpec> kernels{KernelSpec(KernelFamily::Gaussian), KernelSpec(KernelFamily::Linear)};
  // Combining layers of the kernel net; 0 is the single-kernel passthrough.
  int mkl_layers = 2;
  int hidden_units = 8;
  double leak_slope = 0.01;
  Activation activation = Activation::ExactLeakyRelu;
  NormalizeMode normalize = NormalizeMode::None;

  double resolved_jitter_scale() const;
  void validate() const;
};

// Initial model: support vectors per `init`, alpha ~ U(-0.01, 0.01), zero
// bias, uniform simplex weights. The input transform is fitted on `data`
// but `data` itself is expected to be untransformed.
TvSvmModel init_model(const Dataset& data, const TrainConfig& config);

// Epoch-level learning rate rule. With the last three objective values
// J0, J1, J2, the rate shrinks by `decay` if |J2 - J1| > |J1 - J0| and grows
// by 1/decay otherwise, then is clamped to [lr_min, lr_max]. Shorter
// histories leave the rate unchanged.
double lr_update(double lr, std::span<const double> history, double decay, double lr_min, double lr_max);

struct EpochRecord {
  int epoch = 0;
  ObjectiveBreakdown objective;  // mean over the epoch's mini-batches
  double lr = 0.0;               // rate used during the epoch
  double train_accuracy = 0.0;
  std::optional<double> validation_accuracy;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  TvSvmModel model;
  bool diverged = false;
  std::string failure;
  double seconds = 0.0;
};

// Mini-batch SGD on alpha, bias, the support vectors (unless frozen) and
// the raw net weights. Stops early and sets `diverged` if the objective or
// any parameter becomes non-finite.
TrainReport train(const Dataset& data, const TrainConfig& config, const Dataset* validation = nullptr);

// One line per epoch: epoch,J_total,J_reg,J_loss,lr,train_acc,val_acc.
void write_report_csv(const TrainReport& report, std::ostream& out);

// Applies the model's stored input transform, then scores.
double evaluate_accuracy(const TvSvmModel& model, const Dataset& data);

}  // namespace tvsvm
