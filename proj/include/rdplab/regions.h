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

#ifndef RDPLAB_REGIONS_H_
#define RDPLAB_REGIONS_H_

// Single-letter rate regions for compression with strong realism, side
// information Z and common randomness at rate R_c.
//
// A candidate is a joint pmf over (X, Z, V, Y) with X - (Z, V) - Y. For each
// setting the region is described by two lower bounds on R and R + R_c:
//
//   setting        r (rate bound)            r_sum (sum-rate bound)
//   ed-marginal    I(X;V|Z)                  I(Y;V|Z) - H(Z|Y)
//   ed-joint       I(X;V|Z)                  I(Y;V|Z)
//   d-marginal     I(X;V) - I(Z;V)           I(Y;V) - I(Z;V)
//   d-joint        I(X;V|Z)                  I(Y;V|Z)
//   none-marginal  I(X;V)                    I(Y;V)
//
// "ed" = side information at both terminals, "d" = decoder only (which adds
// the constraint Z - X - V). Marginal realism requires p_Y = p_X, joint
// realism p_{Y,Z} = p_{X,Z}. With unbounded common randomness (r_c = inf)
// the sum-rate bound is inactive. The minimum rate at (delta, r_c) is
//   min over feasible candidates with E[d] <= delta of max(0, r, r_sum - r_c).

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdplab/json_io.h"
#include "rdplab/probability.h"

namespace rdplab {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();
// Tolerance of the structural feasibility checks.
inline constexpr double kFeasibilityTolerance = 1e-9;

enum class SideInfo { kBoth, kDecoder, kNone };
enum class Realism { kMarginal, kJoint };

struct Setting {
  SideInfo side_info = SideInfo::kBoth;
  Realism realism = Realism::kMarginal;

  // Accepts ed-marginal, ed-joint, d-marginal, d-joint, none-marginal
  // (and "none" as an alias). none-joint is rejected.
  static Setting Parse(std::string_view name);
  std::string Name() const;
  bool decoder_only() const { return side_info == SideInfo::kDecoder; }

  bool operator==(const Setting&) const = default;
};

// Joint pmf over axes ("x", "z", "v", "y"). Without side information the z
// axis has size 1.
struct Candidate {
  JointPmf joint;

  int x_size() const { return joint.axes()[0].size; }
  int z_size() const { return joint.axes()[1].size; }
  int v_size() const { return joint.axes()[2].size; }
  int y_size() const { return joint.axes()[3].size; }
};

// p(x,z) * encoder(v | x,z) * channel(y | z,v). Encoder rows are indexed
// x * |Z| + z, channel rows z * |V| + v.
Candidate MakeCandidate(const JointPmf& p_xz, const Kernel& encoder,
                        const Kernel& channel);
// Same, with the encoder depending on x only (rows indexed by x).
Candidate MakeDecoderOnlyCandidate(const JointPmf& p_xz, const Kernel& encoder,
                                   const Kernel& channel);
Candidate CandidateFromJoint(JointPmf joint);

// Source law for a setting: without side information Z is made trivial.
JointPmf SourceForSetting(const JointPmf& p_xz, const Setting& setting);

// Human-readable list of violated constraints; empty when feasible.
std::vector<std::string> CheckFeasible(
    const Candidate& c, const Setting& s, const JointPmf& p_xz,
    double tolerance = kFeasibilityTolerance);

struct RatePoint {
  double r = 0.0;
  double r_sum = 0.0;
  double delta = 0.0;  // E[d(X,Y)] of the candidate
  double r_c = kUnbounded;
  double rate = 0.0;
  bool sum_active = false;
  std::string setting;
  int v_size = 0;
  int restarts = 0;
  bool converged = true;
  // "boundary" or "inner-bound" (decoder-only marginal realism with finite
  // common randomness and no common-component guarantee).
  std::string boundary_kind = "boundary";
  std::optional<Candidate> candidate;
};

// Throws kInfeasible if the candidate violates the setting's constraints.
RatePoint EvaluateBounds(const Candidate& c, const Setting& s,
                         const DistortionMatrix& d, double r_c = kUnbounded);
// No feasibility check (used on iterates that are feasible by construction).
RatePoint EvaluateBoundsUnchecked(const Candidate& c, const Setting& s,
                                  const DistortionMatrix& d,
                                  double r_c = kUnbounded);

struct OptimizerConfig {
  int restarts = 32;
  int outer_rounds = 14;
  int inner_iterations = 1500;
  double tolerance = 1e-7;  // realism / distortion violation target
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  bool enforce_realism = true;
};

struct RegionQuery {
  JointPmf p_xz;
  DistortionMatrix d;
  Setting setting;
  double delta = 0.0;
  double r_c = kUnbounded;
  int v_size = 0;  // 0 = |X| * |Z| + 2
  OptimizerConfig optimizer;
};

int DefaultVSize(const RegionQuery& q);

// Multi-start alternating optimization. The value is achieved by the
// returned candidate, hence an upper bound on the true boundary.
RatePoint MinRate(const RegionQuery& q);

struct OracleConfig {
  // Largest number of encoder mesh points; the finest step in
  // {1/32, 1/16, 1/8, 1/4} within this budget is used.
  long long max_points = 2000000;
  int refine_starts = 8;
};

// Mesh over the encoder with the decoder channel solved exactly (a convex
// problem for a fixed encoder), followed by local refinement.
RatePoint BruteForceMinRate(const RegionQuery& q, const OracleConfig& c = {});

// min I(X;Y|Z) over channels p(y|x,z) subject to E[d] <= delta and the
// realism constraint (if any). With enforce_realism=false this is the
// conditional rate-distortion function.
struct ConditionalMiResult {
  double value = 0.0;
  double distortion = 0.0;
  std::vector<double> channel;  // rows x * |Z| + z, |X| columns
};
ConditionalMiResult MinConditionalMi(const JointPmf& p_xz,
                                     const DistortionMatrix& d, double delta,
                                     std::optional<Realism> realism);

// Unbounded common randomness with V = Y: min I(X;Y|Z) under realism.
RatePoint MinRateVEqualsY(const RegionQuery& q);

struct CommonComponent {
  bool trivial = true;
  int components = 1;
  std::vector<int> phi;  // X letter -> component
  std::vector<int> psi;  // Z letter -> component (-1 for null letters)
  double residual_cmi = 0.0;  // I(X;Z|phi(X))
  bool hypothesis_holds = false;
};
CommonComponent FindCommonComponent(const JointPmf& p_xz);

enum class BaselineMode { kConditionalRd, kWynerZiv };
double ClassicalBaseline(const JointPmf& p_xz, const DistortionMatrix& d,
                         double delta, BaselineMode mode,
                         const OptimizerConfig& config = {});

// The no-side-information witness with auxiliary (V, Z): same X, Y, trivial
// Z, V' = (V, Z) encoded as v * |Z| + z.
Candidate EmbedSideInfo(const Candidate& c);

// Modifies the channel rows K(y|w) so that sum_w p_w K(y|w) = target(y)
// exactly: mass above target is thinned by theta = target / P and the
// removed mass is redistributed onto the deficit shape. Rows whose law
// already matches (max deviation <= 1e-12) leave the kernel untouched.
struct SurgeryResult {
  std::vector<double> kernel;
  double tv = 0.0;       // TV(sum_w p_w K, target) before surgery
  double max_phi = 0.0;  // largest per-row mass moved
  bool modified = false;
};
SurgeryResult RealismSurgery(std::span<const double> p_w,
                             std::span<const double> kernel,
                             std::span<const double> target);

Json ToJson(const RatePoint& p);
Json ToJson(const RegionQuery& q);
RegionQuery RegionQueryFromJson(const Json& j);

}  // namespace rdplab

#endif  // RDPLAB_REGIONS_H_
