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

#include "rdplab/regions.h"

#include <gtest/gtest.h>

#include <cmath>

#include "rdplab/error.h"
#include "test_support.h"

namespace rdplab {
namespace {

using testing::BinaryEntropy;

const DistortionMatrix kHamming = DistortionMatrix::Hamming(2);

JointPmf UniformX() { return JointPmf({{"x", 2}, {"z", 1}}, {0.5, 0.5}); }

// Z = X uniform binary.
JointPmf PerfectSideInfo() {
  return JointPmf({{"x", 2}, {"z", 2}}, {0.5, 0.0, 0.0, 0.5});
}

Candidate FromTable(int nx, int nz, int nv, int ny, std::vector<double> data) {
  return CandidateFromJoint(JointPmf(
      {{"x", nx}, {"z", nz}, {"v", nv}, {"y", ny}}, std::move(data)));
}

RegionQuery Query(JointPmf p_xz, const char* setting, double delta,
                  double r_c) {
  const int nx = p_xz.axes()[0].size;
  RegionQuery q{std::move(p_xz), DistortionMatrix::Hamming(nx),
                Setting::Parse(setting), delta, r_c, 0, OptimizerConfig{}};
  q.optimizer.threads = 1;
  q.optimizer.restarts = 8;
  return q;
}

TEST(SettingTest, ParsesNamesAndRejectsNoneJoint) {
  EXPECT_EQ(Setting::Parse("ed-marginal").side_info, SideInfo::kBoth);
  EXPECT_EQ(Setting::Parse("d-joint").realism, Realism::kJoint);
  EXPECT_EQ(Setting::Parse("none").side_info, SideInfo::kNone);
  EXPECT_EQ(Setting::Parse("d-marginal").Name(), "d-marginal");
  EXPECT_THROW(Setting::Parse("none-joint"), Error);
  EXPECT_THROW(Setting::Parse("bogus"), Error);
}

TEST(FeasibilityTest, IdentityCandidateIsFeasible) {
  // X = V = Y uniform, Z an arbitrary noisy copy.
  std::vector<double> data(16, 0.0);
  for (int x = 0; x < 2; ++x) {
    for (int z = 0; z < 2; ++z) {
      data[((x * 2 + z) * 2 + x) * 2 + x] = 0.5 * (z == x ? 0.8 : 0.2);
    }
  }
  const Candidate c = FromTable(2, 2, 2, 2, data);
  const JointPmf p_xz = c.joint.Marginal({"x", "z"});
  EXPECT_TRUE(CheckFeasible(c, Setting::Parse("ed-marginal"), p_xz).empty());
  EXPECT_TRUE(CheckFeasible(c, Setting::Parse("ed-joint"), p_xz).empty());
}

TEST(FeasibilityTest, IndependentOutputWithMatchingMarginal) {
  // Y independent of everything with p_Y = p_X, V constant.
  std::vector<double> data;
  const double pxz[] = {0.4, 0.1, 0.1, 0.4};
  const double py[] = {0.5, 0.5};
  for (int x = 0; x < 2; ++x) {
    for (int z = 0; z < 2; ++z) {
      for (int y = 0; y < 2; ++y) data.push_back(pxz[x * 2 + z] * py[y]);
    }
  }
  const Candidate c = FromTable(2, 2, 1, 2, data);
  EXPECT_TRUE(CheckFeasible(c, Setting::Parse("ed-marginal"),
                            c.joint.Marginal({"x", "z"}))
                  .empty());
  // The same candidate fails joint realism: Y is independent of Z.
  EXPECT_FALSE(CheckFeasible(c, Setting::Parse("ed-joint"),
                             c.joint.Marginal({"x", "z"}))
                   .empty());
}

TEST(FeasibilityTest, DecoderOnlyRequiresMarkovEncoder) {
  CounterRng rng(3, 0);
  const JointPmf p_xz = testing::RandomJoint(rng, {{"x", 2}, {"z", 2}});
  const Candidate c = testing::RandomFeasibleCandidate(
      rng, p_xz, Setting::Parse("ed-marginal"), 3);
  // A generic encoder that looks at z breaks Z - X - V.
  EXPECT_FALSE(CheckFeasible(c, Setting::Parse("d-marginal"), p_xz).empty());
}

TEST(EvaluateBoundsTest, LosslessWithoutSideInformation) {
  const Candidate c = FromTable(2, 1, 2, 2, {0.5, 0, 0, 0, 0, 0, 0, 0.5});
  const RatePoint p = EvaluateBounds(c, Setting::Parse("ed-marginal"), kHamming);
  EXPECT_NEAR(p.r, 1.0, 1e-12);
  EXPECT_NEAR(p.r_sum, 1.0, 1e-12);
  EXPECT_NEAR(p.delta, 0.0, 1e-12);
}

TEST(EvaluateBoundsTest, PerfectSideInformationNeedsNoRate) {
  // Z = X, V constant, Y = Z.
  const Candidate c = FromTable(2, 2, 1, 2, {0.5, 0, 0, 0, 0, 0, 0, 0.5});
  const RatePoint p = EvaluateBounds(c, Setting::Parse("ed-marginal"), kHamming);
  EXPECT_NEAR(p.r, 0.0, 1e-12);
  EXPECT_NEAR(p.r_sum, 0.0, 1e-12);
  EXPECT_NEAR(p.delta, 0.0, 1e-12);
  EXPECT_NEAR(p.rate, 0.0, 1e-12);
}

TEST(EvaluateBoundsTest, DecoderOnlyWithIndependentSideInformation) {
  const JointPmf p_xz({{"x", 2}, {"z", 2}}, {0.15, 0.15, 0.35, 0.35});
  const Kernel encoder = Kernel::BinarySymmetric(0.2);
  const Kernel channel(4, 2, {1, 0, 0, 1, 1, 0, 0, 1});
  const Candidate c = MakeDecoderOnlyCandidate(p_xz, encoder, channel);
  const RatePoint p = EvaluateBoundsUnchecked(c, Setting::Parse("d-marginal"),
                                              kHamming);
  EXPECT_NEAR(p.r, MutualInformation(c.joint, {"x"}, {"v"}), 1e-12);
}

TEST(EvaluateBoundsTest, RateCombinesBothConstraints) {
  const Candidate c = testing::BinaryChainCandidate(0.25, 0.1);
  const Setting s = Setting::Parse("ed-marginal");
  const RatePoint unbounded = EvaluateBounds(c, s, kHamming);
  const RatePoint none = EvaluateBounds(c, s, kHamming, 0.0);
  EXPECT_NEAR(unbounded.rate, std::max(0.0, unbounded.r), 1e-12);
  EXPECT_NEAR(none.rate, std::max({0.0, none.r, none.r_sum}), 1e-12);
  EXPECT_GE(none.rate, unbounded.rate);
}

TEST(MinRateTest, LosslessCostsOneBit) {
  for (double r_c : {0.0, kUnbounded}) {
    const RatePoint p = MinRate(Query(UniformX(), "none", 0.0, r_c));
    EXPECT_NEAR(p.rate, 1.0, 1e-3) << "r_c=" << r_c;
    EXPECT_LE(p.delta, 1e-9);
  }
}

TEST(MinRateTest, BinaryPerfectRealism) {
  const RatePoint p = MinRate(Query(UniformX(), "none", 0.11, kUnbounded));
  EXPECT_NEAR(p.rate, 1.0 - BinaryEntropy(0.11), 1e-3);
  EXPECT_LE(p.delta, 0.11 + 1e-9);
  ASSERT_TRUE(p.candidate.has_value());
  EXPECT_TRUE(CheckFeasible(*p.candidate, Setting::Parse("none"),
                            SourceForSetting(UniformX(), Setting::Parse("none")))
                  .empty());
}

TEST(MinRateTest, PerfectSideInformationIsFree) {
  const RatePoint p =
      MinRate(Query(PerfectSideInfo(), "ed-marginal", 0.05, 0.0));
  EXPECT_NEAR(p.rate, 0.0, 1e-6);
}

TEST(MinRateTest, NonIncreasingInDistortionAndCommonRandomness) {
  CounterRng rng(41, 0);
  const JointPmf p_xz = testing::RandomJoint(rng, {{"x", 2}, {"z", 2}});
  double last = kUnbounded;
  for (double delta : {0.05, 0.15, 0.3}) {
    RegionQuery q = Query(p_xz, "ed-marginal", delta, 0.0);
    q.v_size = 2;
    const double rate = MinRate(q).rate;
    EXPECT_LE(rate, last + 1e-4) << "delta=" << delta;
    last = rate;
    q.r_c = kUnbounded;
    EXPECT_LE(MinRate(q).rate, rate + 1e-4) << "delta=" << delta;
  }
}

TEST(MinRateTest, RejectsInvalidQueries) {
  EXPECT_THROW(MinRate(Query(UniformX(), "none", -0.1, 0.0)), Error);
  EXPECT_THROW(MinRate(Query(UniformX(), "none", 0.1, -1.0)), Error);
}

TEST(BruteForceTest, MatchesKnownValues) {
  EXPECT_NEAR(BruteForceMinRate(Query(UniformX(), "none", 0.0, kUnbounded)).rate,
              1.0, 1e-9);
  EXPECT_NEAR(BruteForceMinRate(Query(UniformX(), "none", 0.5, kUnbounded)).rate,
              0.0, 1e-9);
  EXPECT_NEAR(
      BruteForceMinRate(Query(UniformX(), "none", 0.11, kUnbounded)).rate,
      1.0 - BinaryEntropy(0.11), 2e-3);
}

TEST(BruteForceTest, GridTooLargeIsReported) {
  RegionQuery q = Query(JointPmf({{"x", 4}, {"z", 4}}, std::vector<double>(16, 1.0 / 16)),
                        "ed-marginal", 0.3, kUnbounded);
  q.v_size = 8;
  try {
    BruteForceMinRate(q);
    ADD_FAILURE() << "expected a grid-size error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapExceeded);
  }
}

TEST(CommonComponentTest, KnownStructures) {
  const CommonComponent full = FindCommonComponent(
      JointPmf({{"x", 2}, {"z", 2}}, {0.4, 0.1, 0.1, 0.4}));
  EXPECT_TRUE(full.trivial);
  EXPECT_EQ(full.components, 1);

  const CommonComponent diag = FindCommonComponent(PerfectSideInfo());
  EXPECT_FALSE(diag.trivial);
  EXPECT_EQ(diag.components, 2);
  EXPECT_TRUE(diag.hypothesis_holds);
  EXPECT_EQ(diag.phi[0] == diag.phi[1], false);

  // 4x4 with two blocks and uniform conditionals inside each block.
  std::vector<double> blocks(16, 0.0);
  for (int x = 0; x < 4; ++x) {
    for (int z = 0; z < 4; ++z) {
      if (x / 2 == z / 2) blocks[x * 4 + z] = 1.0 / 8;
    }
  }
  const CommonComponent two =
      FindCommonComponent(JointPmf({{"x", 4}, {"z", 4}}, blocks));
  EXPECT_EQ(two.components, 2);
  EXPECT_NEAR(two.residual_cmi, 0.0, 1e-12);
  EXPECT_TRUE(two.hypothesis_holds);
}

TEST(ClassicalBaselineTest, KnownValues) {
  EXPECT_NEAR(ClassicalBaseline(UniformX(), kHamming, 0.5,
                                BaselineMode::kConditionalRd),
              0.0, 1e-6);
  EXPECT_NEAR(ClassicalBaseline(UniformX(), kHamming, 0.11,
                                BaselineMode::kConditionalRd),
              1.0 - BinaryEntropy(0.11), 1e-3);
  for (BaselineMode mode :
       {BaselineMode::kConditionalRd, BaselineMode::kWynerZiv}) {
    EXPECT_NEAR(ClassicalBaseline(PerfectSideInfo(), kHamming, 0.0, mode), 0.0,
                1e-6);
  }
}

TEST(SideInfoEmbeddingTest, WitnessHasTrivialSideInformation) {
  const Candidate c = testing::BinaryChainCandidate(0.25, 0.1);
  const Candidate w = EmbedSideInfo(c);
  EXPECT_EQ(w.z_size(), 1);
  EXPECT_EQ(w.v_size(), c.v_size() * c.z_size());
  EXPECT_LE(TvDistance(w.joint.Marginal({"x", "y"}), c.joint.Marginal({"x", "y"})),
            1e-15);
}

TEST(RealismSurgeryTest, HitsTargetExactly) {
  CounterRng rng(77, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> p_w = testing::RandomSimplex(rng, 3);
    const Kernel k = testing::RandomKernel(rng, 3, 4);
    const std::vector<double> target = testing::RandomSimplex(rng, 4);
    const SurgeryResult s = RealismSurgery(p_w, k.data(), target);
    std::vector<double> out(4, 0.0);
    for (int w = 0; w < 3; ++w) {
      for (int y = 0; y < 4; ++y) out[y] += p_w[w] * s.kernel[w * 4 + y];
    }
    for (int y = 0; y < 4; ++y) EXPECT_NEAR(out[y], target[y], 1e-12);
    EXPECT_LE(s.max_phi, 1.0 + 1e-12);
  }
}

TEST(RealismSurgeryTest, ExactKernelIsUntouched) {
  const std::vector<double> p_w = {0.5, 0.5};
  const std::vector<double> k = {0.7, 0.3, 0.3, 0.7};
  const SurgeryResult s = RealismSurgery(p_w, k, std::vector<double>{0.5, 0.5});
  EXPECT_FALSE(s.modified);
  EXPECT_EQ(s.kernel, k);
}

TEST(RegionQueryJsonTest, RoundTrips) {
  RegionQuery q = Query(PerfectSideInfo(), "d-joint", 0.2, 0.5);
  q.v_size = 3;
  const RegionQuery back = RegionQueryFromJson(ToJson(q));
  EXPECT_EQ(back.setting, q.setting);
  EXPECT_DOUBLE_EQ(back.delta, q.delta);
  EXPECT_DOUBLE_EQ(back.r_c, q.r_c);
  EXPECT_EQ(back.v_size, 3);
  EXPECT_EQ(back.p_xz, q.p_xz);
  q.r_c = kUnbounded;
  EXPECT_TRUE(std::isinf(RegionQueryFromJson(ToJson(q)).r_c));
}

}  // namespace
}  // namespace rdplab
