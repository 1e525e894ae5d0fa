#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "tvsvm/error.hpp"
#include "tvsvm/trainer.hpp"

using namespace tvsvm;

namespace {

TrainConfig quick_config() {
  TrainConfig c;
  c.epochs = 20;
  c.num_support = 6;
  c.batch_size = 16;
  c.lr0 = 0.001;
  c.hidden_units = 3;
  return c;
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data());
}

}  // namespace

TEST(LrUpdate, Rule) {
  const std::vector<double> slowing{10.0, 8.0, 7.0};    // |1| < |2|: grow
  const std::vector<double> speeding{10.0, 9.0, 7.0};   // |2| > |1|: shrink
  const std::vector<double> steady{10.0, 9.0, 8.0};     // equal speed: grow
  EXPECT_DOUBLE_EQ(lr_update(0.01, slowing, 0.5, 1e-6, 1.0), 0.02);
  EXPECT_DOUBLE_EQ(lr_update(0.01, speeding, 0.5, 1e-6, 1.0), 0.005);
  EXPECT_DOUBLE_EQ(lr_update(0.01, steady, 0.5, 1e-6, 1.0), 0.02);
  EXPECT_DOUBLE_EQ(lr_update(0.8, slowing, 0.5, 1e-6, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(lr_update(1e-6, speeding, 0.5, 1e-6, 1.0), 1e-6);
  const std::vector<double> two{1.0, 2.0};
  EXPECT_EQ(lr_update(0.03, two, 0.5, 1e-6, 1.0), 0.03);
  EXPECT_EQ(lr_update(0.03, {}, 0.5, 1e-6, 1.0), 0.03);
  // Only the last three entries matter.
  const std::vector<double> longer{100.0, 0.0, 10.0, 8.0, 7.0};
  EXPECT_DOUBLE_EQ(lr_update(0.01, longer, 0.5, 1e-6, 1.0), 0.02);
}

TEST(TrainConfig, Validation) {
  auto expect_bad = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), InvalidArgument);
  };
  EXPECT_NO_THROW(TrainConfig{}.validate());
  expect_bad([](TrainConfig& c) { c.C = 0; });
  expect_bad([](TrainConfig& c) { c.num_support = 0; });
  expect_bad([](TrainConfig& c) { c.epochs = 0; });
  expect_bad([](TrainConfig& c) { c.batch_size = 0; });
  expect_bad([](TrainConfig& c) { c.lr_decay = 1.0; });
  expect_bad([](TrainConfig& c) { c.lr0 = 2.0; });
  expect_bad([](TrainConfig& c) { c.jitter_scale = -1; });
  expect_bad([](TrainConfig& c) { c.kernels.clear(); });
  expect_bad([](TrainConfig& c) { c.mkl_layers = 4; });
  expect_bad([](TrainConfig& c) { c.mkl_layers = 0; });
  TrainConfig c;
  EXPECT_EQ(c.resolved_jitter_scale(), 0.01);
  c.freeze_support = true;
  EXPECT_EQ(c.resolved_jitter_scale(), 0.0);
  EXPECT_EQ(parse_init_strategy(init_strategy_name(InitStrategy::KMeans)), InitStrategy::KMeans);
  EXPECT_THROW(parse_init_strategy("random"), InvalidArgument);
}

TEST(InitModel, SubsampleWithoutJitterPicksDistinctRows) {
  const auto data = make_two_moons(40, 0.1, 1);
  auto c = quick_config();
  c.jitter_scale = 0.0;
  const auto m = init_model(data, c);
  std::set<int> picked;
  for (int j = 0; j < m.num_support(); ++j) {
    int match = -1;
    for (int i = 0; i < data.size(); ++i)
      if (data.X.row(i) == m.support.row(j)) match = i;
    ASSERT_GE(match, 0);
    picked.insert(match);
  }
  EXPECT_EQ(static_cast<int>(picked.size()), c.num_support);
  EXPECT_TRUE(m.bias.isZero(0.0));
  EXPECT_LE(m.alpha.cwiseAbs().maxCoeff(), 0.01);
  for (const auto& w : m.net.raw_weights()) EXPECT_TRUE(w.isZero(0.0));
}

TEST(InitModel, MoreSupportThanSamples) {
  const auto data = make_two_moons(4, 0.1, 1);
  auto c = quick_config();
  c.num_support = 9;
  EXPECT_EQ(init_model(data, c).num_support(), 9);
}

TEST(InitModel, UniformStaysInBoundingBox) {
  const auto data = make_xor_gaussians(50, 0.3, 2);
  auto c = quick_config();
  c.init = InitStrategy::UniformRandom;
  c.num_support = 30;
  const auto m = init_model(data, c);
  for (int d = 0; d < 2; ++d) {
    EXPECT_GE(m.support.col(d).minCoeff(), data.X.col(d).minCoeff());
    EXPECT_LE(m.support.col(d).maxCoeff(), data.X.col(d).maxCoeff());
  }
}

TEST(InitModel, KMeansFindsSeparatedClusters) {
  Dataset data;
  data.X.resize(40, 1);
  data.y.resize(40);
  for (int i = 0; i < 40; ++i) {
    data.X(i, 0) = (i < 20 ? -5.0 : 5.0) + 0.01 * (i % 5);
    data.y[i] = i < 20 ? -1 : 1;
  }
  auto c = quick_config();
  c.init = InitStrategy::KMeans;
  c.num_support = 2;
  const auto m = init_model(data, c);
  const double lo = std::min(m.support(0, 0), m.support(1, 0)), hi = std::max(m.support(0, 0), m.support(1, 0));
  EXPECT_NEAR(lo, -5.0 + 0.02, 1e-9);
  EXPECT_NEAR(hi, 5.0 + 0.02, 1e-9);
}

TEST(InitModel, MulticlassHeads) {
  Dataset data;
  data.X = RowMatrix::Random(9, 2);
  data.y.resize(9);
  for (int i = 0; i < 9; ++i) data.y[i] = 2 * (i % 3);
  const auto m = init_model(data, quick_config());
  EXPECT_EQ(m.classes, (std::vector<int>{0, 2, 4}));
  EXPECT_EQ(m.num_heads(), 3);
}

TEST(Train, DeterministicForFixedSeed) {
  const auto data = make_two_moons(60, 0.2, 3);
  auto c = quick_config();
  c.seed = 77;
  const auto a = train(data, c), b = train(data, c);
  EXPECT_TRUE(bitwise_equal(a.model.support, b.model.support));
  EXPECT_TRUE(bitwise_equal(a.model.alpha, b.model.alpha));
  EXPECT_TRUE(bitwise_equal(a.model.bias, b.model.bias));
  for (std::size_t l = 0; l < a.model.net.raw_weights().size(); ++l)
    EXPECT_TRUE(bitwise_equal(a.model.net.raw_weights()[l], b.model.net.raw_weights()[l]));
  c.seed = 78;
  EXPECT_FALSE(bitwise_equal(train(data, c).model.alpha, a.model.alpha));
}

// Full-batch steps at a small fixed rate never increase the objective.
TEST(Train, FullBatchObjectiveNonIncreasing) {
  const auto data = make_two_moons(40, 0.2, 4);
  auto c = quick_config();
  c.batch_size = data.size();
  c.epochs = 60;
  c.lr0 = c.lr_min = c.lr_max = 1e-3;
  c.activation = Activation::SmoothedLeakyRelu;
  const auto r = train(data, c);
  ASSERT_FALSE(r.diverged);
  for (std::size_t e = 1; e < r.epochs.size(); ++e)
    EXPECT_LE(r.epochs[e].objective.total, r.epochs[e - 1].objective.total + 1e-12) << "epoch " << e;
  EXPECT_LT(r.epochs.back().objective.total, r.epochs.front().objective.total);
}

TEST(Train, FrozenSupportNeverMoves) {
  const auto data = make_xor_gaussians(40, 0.3, 5);
  auto c = quick_config();
  c.freeze_support = true;
  const auto init = init_model(data, c);
  const auto r = train(data, c);
  EXPECT_TRUE(r.model.frozen_support);
  EXPECT_TRUE(bitwise_equal(r.model.support, init.support));
  c.freeze_support = false;
  EXPECT_FALSE(bitwise_equal(train(data, c).model.support, init_model(data, c).support));
}

TEST(Train, LearnsSeparableProblem) {
  const auto data = make_xor_gaussians(200, 0.3, 6);
  auto c = quick_config();
  c.epochs = 100;
  c.num_support = 10;
  c.C = 3;
  c.kernels = {KernelSpec(KernelFamily::Gaussian, {{"beta", 2}}), KernelSpec(KernelFamily::Linear)};
  const auto r = train(data, c, &data);
  ASSERT_FALSE(r.diverged);
  EXPECT_GT(r.epochs.back().train_accuracy, 0.95);
  ASSERT_TRUE(r.epochs.back().validation_accuracy.has_value());
  EXPECT_DOUBLE_EQ(*r.epochs.back().validation_accuracy, r.epochs.back().train_accuracy);
  EXPECT_DOUBLE_EQ(evaluate_accuracy(r.model, data), r.epochs.back().train_accuracy);
  for (const auto& w : r.model.net.weights())
    for (Eigen::Index p = 0; p < w.cols(); ++p) EXPECT_NEAR(w.col(p).sum(), 1.0, 1e-12);
}

TEST(Train, Multiclass) {
  Dataset data;
  data.X.resize(90, 2);
  data.y.resize(90);
  const double cx[] = {0, 3, 0}, cy[] = {0, 0, 3};
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 0.3);
  for (int i = 0; i < 90; ++i) {
    data.X(i, 0) = cx[i % 3] + g(rng);
    data.X(i, 1) = cy[i % 3] + g(rng);
    data.y[i] = i % 3 + 1;
  }
  auto c = quick_config();
  c.epochs = 100;
  c.kernels = {KernelSpec(KernelFamily::Gaussian)};
  c.mkl_layers = 1;
  const auto r = train(data, c);
  EXPECT_EQ(r.model.classes, (std::vector<int>{1, 2, 3}));
  EXPECT_GT(evaluate_accuracy(r.model, data), 0.95);
}

TEST(Train, DivergenceIsReported) {
  Dataset data;
  data.X = RowMatrix::Constant(8, 2, 30.0);
  data.X.col(1).setLinSpaced(8, -30, 30);
  data.y.resize(8);
  for (int i = 0; i < 8; ++i) data.y[i] = i % 2 ? 1 : -1;
  auto c = quick_config();
  c.kernels = {KernelSpec(KernelFamily::Polynomial, {{"p", 4}})};
  c.mkl_layers = 0;
  c.lr0 = c.lr_max = 1.0;
  c.C = 100;
  TrainReport r;
  EXPECT_NO_THROW(r = train(data, c));
  EXPECT_TRUE(r.diverged);
  EXPECT_FALSE(r.failure.empty());
}

TEST(Train, ReportCsv) {
  const auto data = make_two_moons(30, 0.2, 8);
  auto c = quick_config();
  c.epochs = 3;
  std::ostringstream out;
  write_report_csv(train(data, c), out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "epoch,J_total,J_reg,J_loss,lr,train_acc,val_acc");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.back(), ',');  // no validation set
    EXPECT_EQ(line.rfind(std::to_string(rows) + ",", 0), 0u) << line;
  }
  EXPECT_EQ(rows, 3);
}

TEST(Train, NormalizationIsStoredWithTheModel) {
  auto data = make_two_moons(60, 0.1, 9);
  data.X.array() = data.X.array() * 50.0 + 100.0;
  auto c = quick_config();
  c.epochs = 60;
  c.normalize = NormalizeMode::MinMaxPerDim;
  c.kernels = {KernelSpec(KernelFamily::HistogramIntersection), KernelSpec(KernelFamily::Gaussian)};
  const auto r = train(data, c);
  EXPECT_EQ(r.model.input_transform.mode, NormalizeMode::MinMaxPerDim);
  EXPECT_GE(r.model.support.minCoeff(), 0.0);
  EXPECT_LE(r.model.support.maxCoeff(), 1.0);
  EXPECT_GT(evaluate_accuracy(r.model, data), 0.7);
}
