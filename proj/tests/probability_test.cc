// Copyright 2026 The rdplab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rdplab/probability.h"

#include <gtest/gtest.h>

#include <cmath>

#include "rdplab/error.h"
#include "test_support.h"

namespace rdplab {
namespace {

JointPmf Bsc(double flip) {
  return JointPmf({{"x", 2}, {"y", 2}},
                  {0.5 * (1 - flip), 0.5 * flip, 0.5 * flip, 0.5 * (1 - flip)});
}

TEST(EntropyTest, KnownValues) {
  EXPECT_NEAR(Entropy(Pmf::Bernoulli(0.5)), 1.0, 1e-15);
  EXPECT_NEAR(Entropy(Pmf::PointMass(3, 1)), 0.0, 1e-15);
  EXPECT_NEAR(Entropy(Pmf::Bernoulli(0.25)), 0.811278124459, 1e-9);
}

TEST(MutualInformationTest, KnownValues) {
  const JointPmf product({{"a", 2}, {"b", 2}}, {0.06, 0.14, 0.24, 0.56});
  EXPECT_NEAR(MutualInformation(product), 0.0, 1e-12);
  EXPECT_NEAR(MutualInformation(Bsc(0.0)), 1.0, 1e-12);
  EXPECT_NEAR(MutualInformation(Bsc(0.11)),
              1.0 - testing::BinaryEntropy(0.11), 1e-12);
  EXPECT_NEAR(MutualInformation(Bsc(0.11)), 0.5, 1e-3);
}

TEST(ConditionalMutualInformationTest, KnownValues) {
  // A = B = C uniform binary.
  const JointPmf copies({{"a", 2}, {"b", 2}, {"c", 2}},
                        {0.5, 0, 0, 0, 0, 0, 0, 0.5});
  EXPECT_NEAR(ConditionalMutualInformation(copies), 0.0, 1e-12);
  // Constant C reduces to I(A;B).
  const JointPmf trivial_c({{"a", 2}, {"b", 2}, {"c", 1}},
                           {0.45, 0.05, 0.05, 0.45});
  EXPECT_NEAR(ConditionalMutualInformation(trivial_c),
              MutualInformation(Bsc(0.1)), 1e-12);
  // Markov chain A - C - B.
  CounterRng rng(5, 0);
  const JointPmf p_c = testing::RandomJoint(rng, {{"c", 3}});
  JointPmf j = KernelCompose(p_c, testing::RandomKernel(rng, 3, 2), "c", "a");
  j = KernelCompose(j, testing::RandomKernel(rng, 3, 2), "c", "b");
  EXPECT_NEAR(ConditionalMutualInformation(j, {"a"}, {"b"}, {"c"}), 0.0,
              1e-12);
}

TEST(TvDistanceTest, KnownValues) {
  EXPECT_DOUBLE_EQ(TvDistance(Pmf::Bernoulli(0.3), Pmf::Bernoulli(0.3)), 0.0);
  EXPECT_DOUBLE_EQ(TvDistance(Pmf::PointMass(2, 0), Pmf::PointMass(2, 1)),
                   1.0);
  EXPECT_DOUBLE_EQ(TvDistance(Pmf::Bernoulli(0.5), Pmf::Bernoulli(0.75)),
                   0.25);
}

TEST(ProductPowerTest, KnownValues) {
  const JointPmf p = ProductPower(Pmf::Bernoulli(0.3), 2);
  ASSERT_EQ(p.size(), 4u);
  const double expected[] = {0.49, 0.21, 0.21, 0.09};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p.data()[i], expected[i], 1e-15);
  const JointPmf u = ProductPower(Pmf::Bernoulli(0.5), 2);
  for (double v : u.data()) EXPECT_NEAR(v, 0.25, 1e-15);
  const JointPmf point = ProductPower(Pmf::PointMass(2, 1), 3);
  EXPECT_DOUBLE_EQ(point.data()[7], 1.0);
}

TEST(AverageEmpiricalTest, KnownValues) {
  const JointPmf iid = ProductPower(Pmf::Bernoulli(0.3), 3);
  const JointPmf avg = AverageEmpirical(iid, 3);
  EXPECT_NEAR(avg.data()[1], 0.3, 1e-15);
  // X1 ~ Bern(0), X2 ~ Bern(1).
  const JointPmf mixed({{"x1", 2}, {"x2", 2}}, {0, 1, 0, 0});
  EXPECT_NEAR(AverageEmpirical(mixed, 2).data()[0], 0.5, 1e-15);
}

TEST(ExpectedDistortionTest, KnownValues) {
  const DistortionMatrix h = DistortionMatrix::Hamming(2);
  EXPECT_DOUBLE_EQ(ExpectedDistortion(Bsc(0.0), h), 0.0);
  EXPECT_DOUBLE_EQ(ExpectedDistortion(Bsc(0.5), h), 0.5);
  EXPECT_NEAR(ExpectedDistortion(Bsc(0.2), h), 0.2, 1e-15);
}

TEST(KernelComposeTest, KnownValues) {
  const JointPmf p_x = JointPmf::FromPmf(Pmf::Bernoulli(0.5), "x");
  const JointPmf j = KernelCompose(p_x, Kernel::BinarySymmetric(0.1), "x", "y");
  const double expected[] = {0.45, 0.05, 0.05, 0.45};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(j.data()[i], expected[i], 1e-15);
  const JointPmf id = KernelCompose(p_x, Kernel::Identity(2), "x", "y");
  EXPECT_DOUBLE_EQ(id.data()[1], 0.0);
  const JointPmf prod = KernelCompose(
      p_x, Kernel::Constant(2, Pmf::Bernoulli(0.3)), "x", "y");
  EXPECT_NEAR(MutualInformation(prod), 0.0, 1e-15);
}

TEST(ConditionTest, KnownValues) {
  const JointPmf c = Condition(Bsc(0.1), "x", 0);
  EXPECT_NEAR(c.data()[1], 0.1, 1e-15);
  const JointPmf diag = Condition(Bsc(0.0), "x", 1);
  EXPECT_DOUBLE_EQ(diag.data()[1], 1.0);
}

TEST(ValidationTest, RejectsInvalidInput) {
  EXPECT_THROW(Pmf({0.5, 0.6}), Error);
  EXPECT_THROW(Pmf({-0.1, 1.1}), Error);
  EXPECT_THROW(JointPmf({{"x", 2}}, {0.5, 0.5, 0.0}), Error);
  EXPECT_THROW(Kernel(1, 2, {0.3, 0.3}), Error);
}

TEST(CapTest, EnumerationBeyondCapThrows) {
  const std::uint64_t saved = EnumerationCap();
  SetEnumerationCap(16);
  try {
    ProductPower(Pmf::Bernoulli(0.5), 5);
    ADD_FAILURE() << "expected the cap to trip";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapExceeded);
  }
  SetEnumerationCap(saved);
}

TEST(InformationPropertiesTest, ChainRule) {
  const testing::PropertyResult r = testing::CheckChainRule(17, 1000);
  EXPECT_EQ(r.instances, 1000);
  EXPECT_LE(r.max_violation, 1e-9) << r.worst;
}

}  // namespace
}  // namespace rdplab
