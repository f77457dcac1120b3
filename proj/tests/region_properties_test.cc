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

#include <gtest/gtest.h>

#include "rdplab/regions.h"
#include "test_support.h"

namespace rdplab::testing {
namespace {

TEST(RegionPropertiesTest, IndependentSideInformationShift) {
  const PropertyResult r = CheckIndependentShift(101, 500);
  EXPECT_EQ(r.instances, 500);
  EXPECT_LE(r.max_violation, 1e-9) << r.worst;
}

TEST(RegionPropertiesTest, SideInformationEmbedding) {
  const PropertyResult r = CheckSideInfoEmbedding(102, 500);
  EXPECT_EQ(r.instances, 500);
  EXPECT_LE(r.max_violation, 1e-9) << r.worst;
}

TEST(RegionPropertiesTest, EncoderSideInformationNeverHurts) {
  const PropertyResult r = CheckEncoderSideDominance(103, 500);
  EXPECT_EQ(r.instances, 500);
  EXPECT_LE(r.max_violation, 1e-9) << r.worst;
}

TEST(RegionPropertiesTest, MarginalRealismIsNoHarderThanJoint) {
  const PropertyResult r = CheckMarginalJointDominance(104, 500);
  EXPECT_EQ(r.instances, 500);
  EXPECT_LE(r.max_violation, 1e-9) << r.worst;
}

TEST(RegionPropertiesTest, GeneratedCandidatesAreFeasible) {
  for (const char* name : {"ed-marginal", "ed-joint", "d-marginal", "d-joint",
                           "none"}) {
    const Setting s = Setting::Parse(name);
    for (int i = 0; i < 50; ++i) {
      CounterRng rng(105, i);
      const JointPmf p_xz = RandomJoint(rng, {{"x", 3}, {"z", 2}});
      const Candidate c = RandomFeasibleCandidate(rng, p_xz, s, 3);
      EXPECT_TRUE(CheckFeasible(c, s, SourceForSetting(p_xz, s)).empty())
          << name << " #" << i;
    }
  }
}

}  // namespace
}  // namespace rdplab::testing
