#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "tvsvm/error.hpp"
#include "tvsvm/gradcheck.hpp"
#include "tvsvm/model_io.hpp"
#include "tvsvm/trainer.hpp"

using namespace tvsvm;

namespace {

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && std::equal(a.data(), a.data() + a.size(), b.data());
}

void expect_identical(const TvSvmModel& a, const TvSvmModel& b) {
  EXPECT_TRUE(same_bits(a.support, b.support));
  EXPECT_TRUE(same_bits(a.alpha, b.alpha));
  EXPECT_TRUE(same_bits(a.bias, b.bias));
  EXPECT_EQ(a.kernels, b.kernels);
  EXPECT_EQ(a.net.layer_sizes(), b.net.layer_sizes());
  EXPECT_EQ(a.net.leak_slope(), b.net.leak_slope());
  EXPECT_EQ(a.net.activation(), b.net.activation());
  ASSERT_EQ(a.net.raw_weights().size(), b.net.raw_weights().size());
  for (std::size_t l = 0; l < a.net.raw_weights().size(); ++l) {
    EXPECT_TRUE(same_bits(a.net.raw_weights()[l], b.net.raw_weights()[l]));
    EXPECT_TRUE(same_bits(a.net.weights()[l], b.net.weights()[l]));
  }
  EXPECT_EQ(a.frozen_support, b.frozen_support);
  EXPECT_EQ(a.classes, b.classes);
  EXPECT_EQ(a.input_transform, b.input_transform);
}

}  // namespace

TEST(ModelIo, RandomModelsRoundTripBitwise) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::vector<KernelSpec> kernels{random_kernel_spec(kAllFamilies[seed % 12], seed),
                                    random_kernel_spec(kAllFamilies[(seed + 5) % 12], seed + 1)};
    const auto inst = random_gradcheck_instance(kernels, 1 + static_cast<int>(seed % 3), seed % 2,
                                                seed % 3 ? Activation::SmoothedLeakyRelu : Activation::ExactLeakyRelu, seed);
    const auto text = model_to_json(inst.model);
    const auto back = model_from_json(text);
    expect_identical(inst.model, back);
    EXPECT_EQ(model_to_json(back), text);
  }
}

TEST(ModelIo, TrainedModelWithTransformOnDisk) {
  auto data = make_two_moons(40, 0.2, 1);
  data.X.array() += 3.0;
  TrainConfig c;
  c.epochs = 5;
  c.num_support = 4;
  c.normalize = NormalizeMode::MinMaxPerDim;
  const auto model = train(data, c).model;
  const auto path = std::filesystem::temp_directory_path() / "tvsvm_model_io_test.json";
  save_model(model, path);
  const auto back = load_model(path);
  std::filesystem::remove(path);
  expect_identical(model, back);
  // Identical test features through the stored transform, hence identical scores.
  const auto test = make_two_moons(30, 0.2, 2);
  const RowMatrix a = model.input_transform.apply(test.X), b = back.input_transform.apply(test.X);
  EXPECT_TRUE(same_bits(a, b));
  for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_EQ(decision(model, row_span(a, i)), decision(back, row_span(b, i)));
}

TEST(ModelIo, Rejections) {
  const auto inst = random_gradcheck_instance({KernelSpec(KernelFamily::Gaussian)}, 1, false, Activation::ExactLeakyRelu, 3);
  const auto good = model_to_json(inst.model);
  EXPECT_THROW(model_from_json("{"), DataError);
  EXPECT_THROW(model_from_json("{}"), DataError);
  auto bump = good;
  bump.replace(bump.find("\"version\": 1"), 12, "\"version\": 99");
  EXPECT_THROW(model_from_json(bump), DataError);
  auto wrong_format = good;
  wrong_format.replace(wrong_format.find("tvsvm-model"), 11, "other-model");
  EXPECT_THROW(model_from_json(wrong_format), DataError);
  EXPECT_THROW(load_model("/nonexistent/model.json"), DataError);
}
