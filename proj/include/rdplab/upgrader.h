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

#ifndef RDPLAB_UPGRADER_H_
#define RDPLAB_UPGRADER_H_

// Exact perfect-realism upgrade of a finite code.
//
// Given the joint law P of (X^n, Z^n, W, Y^n) induced by a code, with
// X^n - (Z^n, W) - Y^n, the decoder kernel P(y^n | z^n, w) is modified so
// that the output law matches a target exactly while the law of
// (X^n, Z^n, W) is untouched. Per side-information string (joint realism) or
// globally (marginal realism): outputs in excess of the target are thinned
// by theta = target / P and the removed mass phi_w is spread over the
// deficit shape Gamma.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdplab/coding_sim.h"
#include "rdplab/json_io.h"
#include "rdplab/probability.h"
#include "rdplab/regions.h"

namespace rdplab {

// Product target over y^n (marginal) or (z^n, y^n) (joint, layout
// z^n * |Y|^n + y^n), built from the single-letter source p(x, z).
std::vector<double> ProductTarget(const JointPmf& p_xz, int n, Realism mode);

// Statistics of a reference law Q with E_Q[d] and TV budgets eps2..eps4.
struct ReferenceStats {
  double distortion = 0.0;
  double eps2 = 0.0;
  double eps3 = 0.0;
  double eps4 = 0.0;
};

struct UpgradeDiagnostics {
  double tv_before = 0.0;    // TV of P's realism marginal to the target
  double tv_p_pprime = 0.0;  // TV(P', P) over the full joint
  double distortion_before = 0.0;
  double distortion_after = 0.0;
  double max_phi = 0.0;
  double max_deviation = 0.0;  // realism marginal of P' vs target
  int modified_blocks = 0;     // side-information strings whose rows moved
};

struct UpgradeOutput {
  InducedCode code;
  UpgradeDiagnostics diagnostics;
};

// Throws kInvalidArgument when the Markov hypothesis fails by more than
// 1e-9 bits or, in joint mode, when P_{Z^n} differs from the target's
// Z^n-marginal by more than 1e-9; kNumerical if the result misses the
// target by more than 1e-12.
UpgradeOutput Upgrade(const InducedCode& code, std::span<const double> target,
                      Realism mode, const DistortionMatrix& d);

struct VerifyReport {
  bool ok = true;
  double max_deviation = 0.0;
  double tv_p_pprime = 0.0;
  double tv_budget = 0.0;
  double encoder_tv = 0.0;
  double max_row_error = 0.0;
  std::optional<double> distortion_after;
  std::optional<double> distortion_bound;
  std::vector<std::string> failures;
};
VerifyReport VerifyUpgrade(const InducedCode& before,
                           std::span<const double> target, Realism mode,
                           const UpgradeOutput& out, const DistortionMatrix& d,
                           const std::optional<ReferenceStats>& reference = {});

Json ToJson(const UpgradeDiagnostics& diag);
Json ToJson(const VerifyReport& report);

}  // namespace rdplab

#endif  // RDPLAB_UPGRADER_H_
