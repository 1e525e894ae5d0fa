#include <gtest/gtest.h>

#include "tvsvm/gradcheck.hpp"

using namespace tvsvm;

TEST(Gradcheck, EveryFamilyPairPasses) {
  for (std::size_t f = 0; f < kAllFamilies.size(); ++f)
    for (bool frozen : {false, true})
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const std::vector<KernelSpec> kernels{random_kernel_spec(kAllFamilies[f], seed),
                                              random_kernel_spec(kAllFamilies[(f + 1) % 12], seed + 100)};
        const auto inst = random_gradcheck_instance(kernels, 2, frozen, Activation::SmoothedLeakyRelu, seed);
        const auto r = check_gradients(inst.model, inst.X, inst.y, inst.C);
        EXPECT_TRUE(r.passed) << family_name(kAllFamilies[f]) << " worst " << r.worst_parameter << " " << r.max_error;
        EXPECT_GT(r.parameters, 0);
      }
}

TEST(Gradcheck, CorruptedGradientIsCaught) {
  const auto inst = random_gradcheck_instance({KernelSpec(KernelFamily::Gaussian), KernelSpec(KernelFamily::Linear)}, 1,
                                              false, Activation::SmoothedLeakyRelu, 4);
  GradcheckOptions opts;
  opts.corrupt = true;
  const auto r = check_gradients(inst.model, inst.X, inst.y, inst.C, opts);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_error, 1e-3);
}

TEST(Gradcheck, InstancesAreSmallAndSeeded) {
  const std::vector<KernelSpec> k{KernelSpec(KernelFamily::Cauchy)};
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = random_gradcheck_instance(k, 0, false, Activation::ExactLeakyRelu, s);
    EXPECT_LE(a.model.num_support(), 5);
    EXPECT_LE(a.model.dim(), 4);
    EXPECT_LE(a.X.rows(), 10);
    const auto b = random_gradcheck_instance(k, 0, false, Activation::ExactLeakyRelu, s);
    EXPECT_EQ(a.X, b.X);
    EXPECT_EQ(a.model.alpha, b.model.alpha);
  }
  EXPECT_EQ(random_kernel_spec(KernelFamily::Power, 9), random_kernel_spec(KernelFamily::Power, 9));
}
