#include "tvsvm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "tvsvm/error.hpp"
#include "tvsvm/numeric_text.hpp"

namespace tvsvm {
namespace {

// Independent generator streams for initialization and shuffling.
enum Stream : std::uint64_t { kInitStream = 1, kShuffleStream = 2 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::vector<int> sample_rows(int n, int count, std::mt19937_64& rng) {
  std::vector<int> out;
  if (count <= n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    out.assign(idx.begin(), idx.begin() + count);
  } else {
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int j = 0; j < count; ++j) out.push_back(pick(rng));
  }
  return out;
}

RowMatrix kmeans(const RowMatrix& X, int k, std::mt19937_64& rng, int iterations = 50) {
  RowMatrix centers(k, X.cols());
  const auto seeds = sample_rows(static_cast<int>(X.rows()), k, rng);
  for (int j = 0; j < k; ++j) centers.row(j) = X.row(seeds[static_cast<std::size_t>(j)]);
  std::vector<int> assign(static_cast<std::size_t>(X.rows()), -1);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      int best = 0;
      double best_d = (X.row(i) - centers.row(0)).squaredNorm();
      for (int j = 1; j < k; ++j) {
        const double d = (X.row(i) - centers.row(j)).squaredNorm();
        if (d < best_d) best_d = d, best = j;
      }
      changed |= assign[static_cast<std::size_t>(i)] != best;
      assign[static_cast<std::size_t>(i)] = best;
    }
    if (!changed) break;
    RowMatrix sums = RowMatrix::Zero(k, X.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += X.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    // An empty cluster keeps its previous centre.
    for (int j = 0; j < k; ++j)
      if (counts[static_cast<std::size_t>(j)] > 0) centers.row(j) = sums.row(j) / counts[static_cast<std::size_t>(j)];
  }
  return centers;
}

bool uses_histograms(const std::vector<KernelSpec>& kernels) {
  return std::any_of(kernels.begin(), kernels.end(),
                     [](const KernelSpec& k) { return k.family() == KernelFamily::HistogramIntersection; });
}

// Histogram kernels are only defined on the unit box.
void project_support(TvSvmModel& m) {
  if (uses_histograms(m.kernels)) m.support = m.support.cwiseMax(0.0).cwiseMin(1.0);
}

bool model_finite(const TvSvmModel& m) {
  if (!m.alpha.allFinite() || !m.bias.allFinite() || !m.support.allFinite()) return false;
  for (const auto& w : m.net.raw_weights())
    if (!w.allFinite()) return false;
  return true;
}

}  // namespace

std::string_view init_strategy_name(InitStrategy s) {
  switch (s) {
    case InitStrategy::SubsampleJitter: return "subsample";
    case InitStrategy::KMeans: return "kmeans";
    case InitStrategy::UniformRandom: return "uniform";
  }
  return "?";
}

InitStrategy parse_init_strategy(std::string_view name) {
  if (name == "subsample") return InitStrategy::SubsampleJitter;
  if (name == "kmeans") return InitStrategy::KMeans;
  if (name == "uniform") return InitStrategy::UniformRandom;
  throw InvalidArgument("unknown init strategy '" + std::string(name) + "' (expected subsample, kmeans or uniform)");
}

double TrainConfig::resolved_jitter_scale() const {
  if (jitter_scale) return *jitter_scale;
  return freeze_support ? 0.0 : 0.01;
}

void TrainConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw InvalidArgument("C must be a positive finite number");
  if (num_support < 1) throw InvalidArgument("number of support vectors must be >= 1");
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (!(lr_decay > 0.0 && lr_decay < 1.0)) throw InvalidArgument("lr decay must lie in (0, 1)");
  if (!(lr_min > 0.0) || !(lr_min <= lr0 && lr0 <= lr_max) || !std::isfinite(lr_max))
    throw InvalidArgument("learning rates must satisfy 0 < lr_min <= lr0 <= lr_max");
  if (jitter_scale && !(*jitter_scale >= 0.0)) throw InvalidArgument("jitter scale must be >= 0");
  if (kernels.empty()) throw InvalidArgument("at least one elementary kernel is required");
  if (mkl_layers < 0 || mkl_layers > 3) throw InvalidArgument("MKL layers must be 0 to 3");
  if (mkl_layers == 0 && kernels.size() != 1)
    throw InvalidArgument("MKL layers 0 (passthrough) needs exactly one kernel");
  if (hidden_units < 1) throw InvalidArgument("hidden units must be >= 1");
  if (!(leak_slope > 0.0 && leak_slope < 0.5)) throw InvalidArgument("leak slope must lie in (0, 0.5)");
}

TvSvmModel init_model(const Dataset& data, const TrainConfig& config) {
  config.validate();
  data.validate();
  TvSvmModel m;
  m.input_transform = FeatureTransform::fit(config.normalize, data.X);
  const RowMatrix X = m.input_transform.apply(data.X);
  const int n = static_cast<int>(X.rows());
  const int N = config.num_support;
  auto rng = make_rng(config.seed, kInitStream);

  switch (config.init) {
    case InitStrategy::SubsampleJitter: {
      const auto rows = sample_rows(n, N, rng);
      m.support.resize(N, X.cols());
      for (int j = 0; j < N; ++j) m.support.row(j) = X.row(rows[static_cast<std::size_t>(j)]);
      const double scale = config.resolved_jitter_scale();
      if (scale > 0.0) {
        const Eigen::RowVectorXd mean = X.colwise().mean();
        const Eigen::RowVectorXd sd = ((X.rowwise() - mean).array().square().colwise().sum() / n).sqrt();
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int j = 0; j < N; ++j)
          for (Eigen::Index d = 0; d < X.cols(); ++d) m.support(j, d) += scale * sd[d] * gauss(rng);
      }
      break;
    }
    case InitStrategy::KMeans:
      m.support = kmeans(X, N, rng);
      break;
    case InitStrategy::UniformRandom: {
      const Eigen::RowVectorXd lo = X.colwise().minCoeff();
      const Eigen::RowVectorXd hi = X.colwise().maxCoeff();
      std::uniform_real_distribution<double> u(0.0, 1.0);
      m.support.resize(N, X.cols());
      for (int j = 0; j < N; ++j)
        for (Eigen::Index d = 0; d < X.cols(); ++d) m.support(j, d) = lo[d] + (hi[d] - lo[d]) * u(rng);
      break;
    }
  }

  if (!data.is_binary()) m.classes = data.classes();
  const int heads = m.classes.empty() ? 1 : static_cast<int>(m.classes.size());
  std::uniform_real_distribution<double> small(-0.01, 0.01);
  m.alpha.resize(heads, N);
  for (int k = 0; k < heads; ++k)
    for (int j = 0; j < N; ++j) m.alpha(k, j) = small(rng);
  m.bias = Vector::Zero(heads);
  m.kernels = config.kernels;
  project_support(m);
  m.net = DeepKernelNet::with_layers(static_cast<int>(config.kernels.size()), config.mkl_layers,
                                     config.hidden_units, config.leak_slope, config.activation);
  m.frozen_support = config.freeze_support;
  m.validate();
  return m;
}

double lr_update(double lr, std::span<const double> history, double decay, double lr_min, double lr_max) {
  if (history.size() < 3) return lr;
  const std::size_t t = history.size() - 1;
  const double speed = std::abs(history[t] - history[t - 1]);
  const double previous = std::abs(history[t - 1] - history[t - 2]);
  const double next = speed > previous ? lr * decay : lr / decay;
  return std::clamp(next, lr_min, lr_max);
}

TrainReport train(const Dataset& data, const TrainConfig& config, const Dataset* validation) {
  const auto start = std::chrono::steady_clock::now();
  TrainReport report;
  report.model = init_model(data, config);
  TvSvmModel& m = report.model;

  const RowMatrix X = m.input_transform.apply(data.X);
  RowMatrix X_val;
  if (validation) {
    validation->validate();
    X_val = m.input_transform.apply(validation->X);
  }
  const int n = data.size();
  const int batch = std::min(config.batch_size, n);
  auto rng = make_rng(config.seed, kShuffleStream);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  double lr = config.lr0;
  std::vector<double> history;
  for (int epoch = 1; epoch <= config.epochs && !report.diverged; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    int steps = 0;
    try {
      for (int begin = 0; begin < n; begin += batch) {
        const int size = std::min(batch, n - begin);
        RowMatrix Xb(size, X.cols());
        Eigen::VectorXi yb(size);
        for (int i = 0; i < size; ++i) {
          const int r = order[static_cast<std::size_t>(begin + i)];
          Xb.row(i) = X.row(r);
          yb[i] = data.y[r];
        }
        const ModelGradient g = gradients(m, Xb, yb, config.C, static_cast<double>(n) / size);
        if (!std::isfinite(g.objective.total)) throw NumericalError("objective became non-finite");
        rec.objective.regularizer += g.objective.regularizer;
        rec.objective.loss += g.objective.loss;
        rec.objective.total += g.objective.total;
        ++steps;

        m.alpha -= lr * g.alpha;
        m.bias -= lr * g.bias;
        if (!m.frozen_support) {
          m.support -= lr * g.support;
          project_support(m);
        }
        m.net.apply_step(g.raw_weights, lr);
        if (!model_finite(m)) throw NumericalError("parameters became non-finite");
      }
      rec.train_accuracy = accuracy(m, X, data.y);
      if (validation) rec.validation_accuracy = accuracy(m, X_val, validation->y);
    } catch (const NumericalError& e) {
      report.diverged = true;
      report.failure = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    rec.objective.regularizer /= steps;
    rec.objective.loss /= steps;
    rec.objective.total /= steps;
    report.epochs.push_back(rec);

    history.push_back(rec.objective.total);
    lr = lr_update(lr, history, config.lr_decay, config.lr_min, config.lr_max);
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_report_csv(const TrainReport& report, std::ostream& out) {
  out << "epoch,J_total,J_reg,J_loss,lr,train_acc,val_acc\n";
  for (const auto& r : report.epochs) {
    out << r.epoch << ',' << format_double(r.objective.total) << ',' << format_double(r.objective.regularizer) << ','
        << format_double(r.objective.loss) << ',' << format_double(r.lr) << ',' << format_double(r.train_accuracy)
        << ',';
    if (r.validation_accuracy) out << format_double(*r.validation_accuracy);
    out << '\n';
  }
}

double evaluate_accuracy(const TvSvmModel& model, const Dataset& data) {
  return accuracy(model, model.input_transform.apply(data.X), data.y);
}

}  // namespace tvsvm
