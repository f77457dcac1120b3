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


#include "rdplab/upgrader.h"

#include <gtest/gtest.h>

#include <functional>
#include <vector>

#include "rdplab/error.h"
#include "rdplab/rng.h"
#include "test_support.h"

namespace rdplab {
namespace {

const DistortionMatrix kHamming = DistortionMatrix::Hamming(2);

// Single-letter code from a table p(x, z, w, y).
InducedCode MakeCode(int nx, int nz, int nw, int ny,
                     const std::function<double(int, int, int, int)>& p) {
  std::vector<double> data;
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) {
      for (int w = 0; w < nw; ++w) {
        for (int y = 0; y < ny; ++y) data.push_back(p(x, z, w, y));
      }
    }
  }
  return InducedCode{
      JointPmf({{"xn", nx}, {"zn", nz}, {"m", nw}, {"yn", ny}}, data), 1, nx,
      nz, ny, "test"};
}

double Bern(double p1, int b) { return b ? p1 : 1.0 - p1; }

// X uniform, Z = X, W = X, and Y | Z=z ~ Bern(flip[z]).
InducedCode SideInfoCode(double flip0, double flip1) {
  return MakeCode(2, 2, 2, 2, [&](int x, int z, int w, int y) {
    if (z != x || w != x) return 0.0;
    return 0.5 * Bern(z ? flip1 : flip0, y);
  });
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kNumerical;
}

TEST(UpgradeTest, RealisticCodeIsUnchanged) {
  const InducedCode code = SideInfoCode(0.3, 0.7);
  const std::vector<double> target = {0.35, 0.15, 0.15, 0.35};
  const UpgradeOutput out = Upgrade(code, target, Realism::kJoint, kHamming);
  EXPECT_LE(TvDistance(out.code.joint, code.joint), 1e-15);
  EXPECT_EQ(out.diagnostics.modified_blocks, 0);
  EXPECT_LE(out.diagnostics.tv_p_pprime, 1e-15);
}

TEST(UpgradeTest, BinaryOutputReachesUniformTarget) {
  // Z trivial, W uniform binary, P_Y = Bern(0.4); target Bern(0.5).
  const InducedCode code = MakeCode(2, 1, 2, 2, [](int x, int, int w, int y) {
    if (w != x) return 0.0;
    return 0.5 * Bern(w ? 0.6 : 0.2, y);
  });
  const std::vector<double> target = {0.5, 0.5};
  const UpgradeOutput out = Upgrade(code, target, Realism::kMarginal, kHamming);
  const Pmf p_y = out.code.joint.Marginal({"yn"}).ToPmf();
  EXPECT_NEAR(p_y[0], 0.5, 1e-12);
  EXPECT_NEAR(p_y[1], 0.5, 1e-12);
  EXPECT_NEAR(out.diagnostics.tv_before, 0.1, 1e-12);
  EXPECT_LE(out.diagnostics.tv_p_pprime, 0.1 + 1e-12);
  EXPECT_LE(out.diagnostics.max_deviation, 1e-12);
  EXPECT_LE(out.diagnostics.distortion_after,
            out.diagnostics.distortion_before + 0.1 + 1e-12);
  // The encoder side is untouched.
  EXPECT_LE(TvDistance(out.code.joint.Marginal({"xn", "zn", "m"}),
                       code.joint.Marginal({"xn", "zn", "m"})),
            1e-15);
}

TEST(UpgradeTest, JointModeOnlyTouchesMismatchedSideInformation) {
  // Output already matches the target for z = 0 but not for z = 1.
  const InducedCode code = SideInfoCode(0.3, 0.3);
  const std::vector<double> target = {0.35, 0.15, 0.15, 0.35};
  const UpgradeOutput out = Upgrade(code, target, Realism::kJoint, kHamming);
  EXPECT_EQ(out.diagnostics.modified_blocks, 1);
  EXPECT_LE(out.diagnostics.max_deviation, 1e-12);
  const JointPmf& before = code.joint;
  const JointPmf& after = out.code.joint;
  const auto& a = after.data();
  const auto& b = before.data();
  for (int x = 0; x < 2; ++x) {
    for (int w = 0; w < 2; ++w) {
      for (int y = 0; y < 2; ++y) {
        const int i = ((x * 2 + 0) * 2 + w) * 2 + y;
        EXPECT_EQ(a[i], b[i]) << x << w << y;
      }
    }
  }
  const JointPmf zy = after.Marginal({"zn", "yn"});
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(zy.data()[k], target[k], 1e-12);
}

TEST(UpgradeTest, RejectsMarkovViolation) {
  // Y = X with nothing of X visible to the decoder.
  const InducedCode code = MakeCode(2, 1, 1, 2, [](int x, int, int, int y) {
    return y == x ? 0.5 : 0.0;
  });
  const std::vector<double> target = {0.5, 0.5};
  EXPECT_EQ(CodeOf([&] { Upgrade(code, target, Realism::kMarginal, kHamming); }),
            ErrorCode::kInvalidArgument);
}

TEST(UpgradeTest, RejectsSideInformationMarginalMismatch) {
  const InducedCode code = SideInfoCode(0.3, 0.3);
  const std::vector<double> target = {0.2, 0.1, 0.35, 0.35};
  EXPECT_EQ(CodeOf([&] { Upgrade(code, target, Realism::kJoint, kHamming); }),
            ErrorCode::kInvalidArgument);
}

TEST(UpgradeTest, RejectsBadTargetShape) {
  const InducedCode code = SideInfoCode(0.3, 0.3);
  const std::vector<double> target = {0.5, 0.5, 0.0};
  EXPECT_EQ(CodeOf([&] { Upgrade(code, target, Realism::kMarginal, kHamming); }),
            ErrorCode::kInvalidArgument);
}

TEST(ProductTargetTest, MatchesSourceMarginals) {
  const JointPmf p_xz({{"x", 2}, {"z", 2}}, {0.4, 0.1, 0.2, 0.3});
  const std::vector<double> marginal = ProductTarget(p_xz, 2, Realism::kMarginal);
  ASSERT_EQ(marginal.size(), 4u);
  EXPECT_NEAR(marginal[0], 0.25, 1e-15);
  EXPECT_NEAR(marginal[1], 0.25, 1e-15);
  const std::vector<double> joint = ProductTarget(p_xz, 1, Realism::kJoint);
  ASSERT_EQ(joint.size(), 4u);
  // Layout z * |Y| + y with Y distributed as X.
  EXPECT_NEAR(joint[0 * 2 + 0], 0.4, 1e-15);
  EXPECT_NEAR(joint[1 * 2 + 0], 0.1, 1e-15);
  EXPECT_NEAR(joint[0 * 2 + 1], 0.2, 1e-15);
  EXPECT_NEAR(joint[1 * 2 + 1], 0.3, 1e-15);
}

TEST(VerifyUpgradeTest, RandomCodesVerify) {
  for (int i = 0; i < 50; ++i) {
    CounterRng rng(0x7665726966ULL, i);
    const int n = 1 + i % 3;
    const Realism mode = i % 2 ? Realism::kJoint : Realism::kMarginal;
    const testing::RandomCode rc = testing::RandomInducedCode(rng, n, 3);
    const std::vector<double> target = ProductTarget(rc.p_xz, n, mode);
    const UpgradeOutput out = Upgrade(rc.code, target, mode, kHamming);
    const ReferenceStats ref{out.diagnostics.distortion_before,
                             out.diagnostics.tv_before, 0.0, 0.0};
    const VerifyReport r =
        VerifyUpgrade(rc.code, target, mode, out, kHamming, ref);
    EXPECT_TRUE(r.ok) << "instance " << i;
    EXPECT_TRUE(r.failures.empty());
    EXPECT_LE(r.max_deviation, 1e-12);
    EXPECT_LE(r.tv_p_pprime, r.tv_budget + 1e-12);
    EXPECT_LE(r.encoder_tv, 1e-12);
    ASSERT_TRUE(r.distortion_bound.has_value());
    EXPECT_LE(*r.distortion_after, *r.distortion_bound + 1e-12);
  }
}

TEST(VerifyUpgradeTest, DetectsUnupgradedCode) {
  const InducedCode code = SideInfoCode(0.3, 0.3);
  const std::vector<double> target = {0.35, 0.15, 0.15, 0.35};
  UpgradeOutput fake{code, {}};
  const VerifyReport r =
      VerifyUpgrade(code, target, Realism::kJoint, fake, kHamming);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.failures.empty());
  EXPECT_NEAR(r.max_deviation, 0.2, 1e-12);
}

}  // namespace
}  // namespace rdplab
