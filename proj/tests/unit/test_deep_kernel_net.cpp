#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tvsvm/deep_kernel_net.hpp"
#include "tvsvm/error.hpp"

using namespace tvsvm;
using tvsvm::testing::rel_error;

namespace {

// Scalar-loop reference for the whole combiner.
double reference_output(const std::vector<Eigen::MatrixXd>& raw, std::vector<double> values, double slope,
                        Activation mode) {
  for (const auto& w : raw) {
    std::vector<double> next(static_cast<std::size_t>(w.cols()));
    for (Eigen::Index p = 0; p < w.cols(); ++p) {
      double mx = -INFINITY;
      for (Eigen::Index q = 0; q < w.rows(); ++q) mx = std::max(mx, w(q, p));
      double z = 0;
      for (Eigen::Index q = 0; q < w.rows(); ++q) z += std::exp(w(q, p) - mx);
      double t = 0;
      for (Eigen::Index q = 0; q < w.rows(); ++q) t += std::exp(w(q, p) - mx) / z * values[static_cast<std::size_t>(q)];
      next[static_cast<std::size_t>(p)] =
          mode == Activation::ExactLeakyRelu ? std::max(slope * t, t) : slope * t + std::log1p(std::exp((1 - slope) * t));
    }
    values = std::move(next);
  }
  return values.front();
}

std::vector<Eigen::MatrixXd> random_raw(const DeepKernelNet& net, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  std::vector<Eigen::MatrixXd> raw;
  for (const auto& w : net.raw_weights()) {
    Eigen::MatrixXd m(w.rows(), w.cols());
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    raw.push_back(m);
  }
  return raw;
}

}  // namespace

TEST(LeakyRelu, Values) {
  EXPECT_EQ(leaky_relu(2.0, 0.01, Activation::ExactLeakyRelu), 2.0);
  EXPECT_EQ(leaky_relu(-2.0, 0.01, Activation::ExactLeakyRelu), -0.02);
  EXPECT_NEAR(leaky_relu(0.0, 0.1, Activation::SmoothedLeakyRelu), std::log(2.0), 1e-15);
  for (double t : {-30.0, -1.0, 0.5, 3.0, 40.0, 800.0}) {
    const double fd = (leaky_relu(t + 1e-6, 0.05, Activation::SmoothedLeakyRelu) -
                       leaky_relu(t - 1e-6, 0.05, Activation::SmoothedLeakyRelu)) / 2e-6;
    EXPECT_LT(rel_error(leaky_relu_derivative(t, 0.05, Activation::SmoothedLeakyRelu), fd), 1e-6) << t;
    EXPECT_TRUE(std::isfinite(leaky_relu(t, 0.05, Activation::SmoothedLeakyRelu)));
  }
  EXPECT_EQ(parse_activation("exact"), Activation::ExactLeakyRelu);
  EXPECT_EQ(parse_activation(activation_name(Activation::SmoothedLeakyRelu)), Activation::SmoothedLeakyRelu);
  EXPECT_THROW(parse_activation("relu"), InvalidArgument);
}

TEST(SimplexWeights, ZeroRawGivesUniform) {
  const Eigen::MatrixXd w = simplex_weights(Eigen::MatrixXd::Zero(2, 1));
  EXPECT_EQ(w(0, 0), 0.5);
  EXPECT_EQ(w(1, 0), 0.5);
}

TEST(SimplexWeights, ShiftInvariantAndStable) {
  Eigen::MatrixXd raw(3, 2);
  raw << 1, -2, 2, 0, 3, 5;
  const Eigen::MatrixXd a = simplex_weights(raw);
  const Eigen::MatrixXd b = simplex_weights(raw.array() + 1000.0);
  EXPECT_TRUE(a.isApprox(b, 1e-14));
  for (int p = 0; p < 2; ++p) EXPECT_NEAR(a.col(p).sum(), 1.0, 1e-15);
  // Dominant raw weight saturates without overflow.
  Eigen::MatrixXd big(2, 1);
  big << 800, 0;
  const Eigen::MatrixXd s = simplex_weights(big);
  EXPECT_EQ(s(0, 0), 1.0);
  EXPECT_GE(s(1, 0), 0.0);
  EXPECT_THROW(simplex_weights(Eigen::MatrixXd::Constant(2, 1, NAN)), NumericalError);
}

TEST(SimplexWeights, RandomColumnsOnSimplex) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 10);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd raw(1 + trial % 7, 1 + trial % 3);
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = g(rng);
    const Eigen::MatrixXd w = simplex_weights(raw);
    EXPECT_GE(w.minCoeff(), 0.0);
    for (Eigen::Index p = 0; p < w.cols(); ++p) EXPECT_NEAR(w.col(p).sum(), 1.0, 1e-12);
  }
}

TEST(DeepKernelNet, Layouts) {
  EXPECT_EQ(DeepKernelNet::with_layers(1, 0).layer_sizes(), std::vector<int>{1});
  EXPECT_EQ(DeepKernelNet::with_layers(3, 1).layer_sizes(), (std::vector<int>{3, 1}));
  EXPECT_EQ(DeepKernelNet::with_layers(3, 3, 5).layer_sizes(), (std::vector<int>{3, 5, 5, 1}));
  const auto net = DeepKernelNet::with_layers(3, 2, 4);
  ASSERT_EQ(net.raw_weights().size(), 2u);
  EXPECT_EQ(net.raw_weights()[0].rows(), 3);
  EXPECT_EQ(net.raw_weights()[0].cols(), 4);
  EXPECT_EQ(net.raw_weights()[1].rows(), 4);
  EXPECT_EQ(net.raw_weights()[1].cols(), 1);
  EXPECT_THROW(DeepKernelNet::with_layers(2, 0), InvalidArgument);
  EXPECT_THROW(DeepKernelNet::with_layers(2, -1), InvalidArgument);
  EXPECT_THROW(DeepKernelNet(std::vector<int>{2, 2}), InvalidArgument);
  EXPECT_THROW(DeepKernelNet(std::vector<int>{}), InvalidArgument);
  EXPECT_THROW(DeepKernelNet(std::vector<int>{2, 1}, 0.7), InvalidArgument);
}

TEST(MklForward, WorkedValues) {
  const auto net = DeepKernelNet::with_layers(2, 1);
  EXPECT_DOUBLE_EQ(mkl_output(net, std::vector<double>{0.3, 0.7}), 0.5);
  EXPECT_DOUBLE_EQ(mkl_output(net, std::vector<double>{-0.3, -0.7}), -0.005);
  const auto pass = DeepKernelNet::with_layers(1, 0);
  EXPECT_EQ(mkl_output(pass, std::vector<double>{-4.25}), -4.25);
  EXPECT_THROW(mkl_output(net, std::vector<double>{1.0}), DimensionMismatch);
}

TEST(MklForward, MatchesScalarReference) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2, 2);
  for (Activation mode : {Activation::ExactLeakyRelu, Activation::SmoothedLeakyRelu})
    for (int layers = 1; layers <= 3; ++layers)
      for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 4;
        auto net = DeepKernelNet::with_layers(n, layers, 3, 0.05, mode);
        const auto raw = random_raw(net, rng);
        net.set_raw_weights(raw);
        std::vector<double> kv(static_cast<std::size_t>(n));
        for (auto& v : kv) v = u(rng);
        EXPECT_NEAR(mkl_output(net, kv), reference_output(raw, kv, 0.05, mode), 1e-13);
      }
}

TEST(MklBackward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  const double h = 1e-6;
  for (Activation mode : {Activation::ExactLeakyRelu, Activation::SmoothedLeakyRelu})
    for (int layers = 1; layers <= 3; ++layers)
      for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 4;
        auto net = DeepKernelNet::with_layers(n, layers, 3, 0.05, mode);
        auto raw = random_raw(net, rng);
        net.set_raw_weights(raw);
        std::vector<double> kv(static_cast<std::size_t>(n));
        for (auto& v : kv) v = u(rng);
        const double up = 0.7;
        const auto result = mkl_forward(net, kv);
        const auto g = mkl_backward(net, result.tape, up);
        for (std::size_t q = 0; q < kv.size(); ++q) {
          auto p = kv, m = kv;
          p[q] += h, m[q] -= h;
          EXPECT_LT(rel_error(g.grad_kv[static_cast<Eigen::Index>(q)],
                              up * (reference_output(raw, p, 0.05, mode) - reference_output(raw, m, 0.05, mode)) / (2 * h)),
                    1e-5);
        }
        for (std::size_t l = 0; l < raw.size(); ++l)
          for (Eigen::Index i = 0; i < raw[l].size(); ++i) {
            auto rp = raw, rm = raw;
            rp[l].data()[i] += h, rm[l].data()[i] -= h;
            const double fd = (reference_output(rp, kv, 0.05, mode) - reference_output(rm, kv, 0.05, mode)) / (2 * h);
            EXPECT_LT(rel_error(g.grad_raw[l].data()[i], up * fd), 1e-5) << "layer " << l;
          }
      }
}

TEST(MklBackward, AccumulatorSumsTapes) {
  std::mt19937_64 rng(4);
  auto net = DeepKernelNet::with_layers(3, 2, 4, 0.01, Activation::SmoothedLeakyRelu);
  net.set_raw_weights(random_raw(net, rng));
  MklGradientAccumulator acc(net);
  std::vector<Eigen::MatrixXd> direct;
  for (int t = 0; t < 5; ++t) {
    const std::vector<double> kv{0.1 * t, -0.3, 0.5 + t};
    const auto r = mkl_forward(net, kv);
    std::vector<double> gkv(3);
    acc.add(r.tape, 1.0 + t, gkv);
    const auto g = mkl_backward(net, r.tape, 1.0 + t);
    for (int q = 0; q < 3; ++q) EXPECT_NEAR(gkv[static_cast<std::size_t>(q)], g.grad_kv[q], 1e-14);
    if (direct.empty()) direct = g.grad_raw;
    else for (std::size_t l = 0; l < direct.size(); ++l) direct[l] += g.grad_raw[l];
  }
  const auto summed = acc.raw_gradient();
  for (std::size_t l = 0; l < direct.size(); ++l) EXPECT_TRUE(summed[l].isApprox(direct[l], 1e-12));
}

TEST(MklBackward, StaleTapeRejected) {
  auto net = DeepKernelNet::with_layers(2, 1);
  const auto r = mkl_forward(net, std::vector<double>{0.1, 0.2});
  net.apply_step({Eigen::MatrixXd::Ones(2, 1)}, 0.1);
  EXPECT_THROW(mkl_backward(net, r.tape, 1.0), InvalidArgument);
}

// Any number of raw-weight updates keeps every column on the simplex.
TEST(DeepKernelNet, StepsStayOnSimplex) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 50);
  auto net = DeepKernelNet::with_layers(4, 3, 6);
  for (int step = 0; step < 1000; ++step) {
    std::vector<Eigen::MatrixXd> grad;
    for (const auto& w : net.raw_weights()) {
      Eigen::MatrixXd m(w.rows(), w.cols());
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
      grad.push_back(m);
    }
    net.apply_step(grad, 0.1);
  }
  for (const auto& w : net.weights()) {
    EXPECT_GE(w.minCoeff(), 0.0);
    for (Eigen::Index p = 0; p < w.cols(); ++p) EXPECT_NEAR(w.col(p).sum(), 1.0, 1e-12);
  }
}
