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

#ifndef RDPLAB_SRC_REGION_INTERNAL_H_
#define RDPLAB_SRC_REGION_INTERNAL_H_

// Dense (x, z, v, y) tensors shared by the optimizer, the oracle and the
// bound evaluator.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "rdplab/regions.h"

namespace rdplab::internal {

// Axis bits of an entropy term.
inline constexpr int kX = 1, kZ = 2, kV = 4, kY = 8;

struct Dims {
  int nx = 1, nz = 1, nv = 1, ny = 1;
  int size() const { return nx * nz * nv * ny; }
  int index(int x, int z, int v, int y) const {
    return ((x * nz + z) * nv + v) * ny + y;
  }
};

// A signed sum of joint entropies H(S) with S given by axis bits.
using EntropyTerms = std::vector<std::pair<int, double>>;

struct BoundTerms {
  EntropyTerms r;
  EntropyTerms s;
};

BoundTerms TermsFor(const Setting& setting);

// Joint built from the three factors. The encoder has |X|*|Z| rows, or |X|
// rows when decoder_only is set; the channel has |Z|*|V| rows.
std::vector<double> BuildJoint(const Dims& dims, const std::vector<double>& pxz,
                               const std::vector<double>& encoder,
                               const std::vector<double>& channel,
                               bool decoder_only);

// Flat index of each joint entry inside the marginal over `mask`.
std::vector<int> MarginalIndex(const Dims& dims, int mask);
int MaskSize(const Dims& dims, int mask);

double TermsValue(const Dims& dims, const std::vector<double>& joint,
                  const EntropyTerms& terms);

inline double Log2Safe(double p) {
  return std::log2(p > 1e-300 ? p : 1e-300);
}

inline constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

}  // namespace rdplab::internal

#endif  // RDPLAB_SRC_REGION_INTERNAL_H_
