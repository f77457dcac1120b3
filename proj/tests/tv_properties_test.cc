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

#include "test_support.h"

namespace rdplab::testing {
namespace {

void ExpectExact(const PropertyResult& r, int count) {
  EXPECT_EQ(r.instances, count);
  EXPECT_LE(r.max_violation, 1e-12) << r.worst;
}

TEST(TvPropertiesTest, SameInputDifferentChannels) {
  ExpectExact(CheckSameInputTv(1, 1000), 1000);
}

TEST(TvPropertiesTest, MarginalContraction) {
  ExpectExact(CheckMarginalTvContraction(2, 1000), 1000);
}

TEST(TvPropertiesTest, SameChannelDifferentInputs) {
  ExpectExact(CheckSameChannelTv(3, 1000), 1000);
}

TEST(TvPropertiesTest, CouplingBound) {
  ExpectExact(CheckCouplingTv(4, 1000), 1000);
}

TEST(TvPropertiesTest, OptimalCriticAccuracy) {
  ExpectExact(CheckCriticBound(5, 1000), 1000);
}

}  // namespace
}  // namespace rdplab::testing
