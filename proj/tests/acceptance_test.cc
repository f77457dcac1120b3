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

// Acceptance runner: one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iterator>
#include <functional>
#include <string>
#include <vector>

#include "rdplab/coding_sim.h"
#include "rdplab/gaussian.h"
#include "rdplab/regions.h"
#include "rdplab/rng.h"
#include "rdplab/upgrader.h"
#include "test_support.h"

namespace rdplab {
namespace {

using testing::BinaryChainCandidate;
using testing::BinaryEntropy;
using testing::PropertyResult;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, double a = 0, double b = 0, double c = 0,
                   double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

RegionQuery Query(JointPmf p_xz, const char* setting, double delta,
                  double r_c, int v_size = 0, std::uint64_t seed = 0) {
  const int nx = p_xz.axes()[0].size;
  RegionQuery q{std::move(p_xz), DistortionMatrix::Hamming(nx),
                Setting::Parse(setting), delta, r_c, v_size, OptimizerConfig{}};
  q.optimizer.seed = seed;
  q.optimizer.threads = 1;
  return q;
}

std::vector<double> DeltaGrid() {
  std::vector<double> grid;
  for (int i = 1; i <= 39; ++i) grid.push_back(0.05 * i);
  return grid;
}

Outcome GaussianClosedForms() {
  double residual = 0.0, err0 = 0.0, err_inf = 0.0;
  for (double delta : DeltaGrid()) {
    for (CrRate rc : {CrRate::Bits(0.0), CrRate::Bits(1.0),
                      CrRate::Unbounded()}) {
      residual = std::max(
          residual, std::abs(RhoResidual(SolveRho(delta, rc), delta, rc)));
    }
    err0 = std::max(err0, std::abs(RateNormal(delta, CrRate::Bits(0.0)) -
                                   0.5 * std::log2(2.0 / delta)));
    err_inf = std::max(
        err_inf, std::abs(RateNormal(delta, CrRate::Unbounded()) -
                          0.5 * std::log2(1.0 / (delta * (1.0 - delta / 4)))));
  }
  return {residual < 1e-12 && err0 <= 1e-12 && err_inf <= 1e-12,
          Format("max residual %.2e, rc=0 error %.2e, rc=inf error %.2e",
                 residual, err0, err_inf)};
}

Outcome ThreeDbPenalty() {
  std::vector<double> grid;
  for (double delta : DeltaGrid()) {
    if (delta <= 1.0) grid.push_back(delta);
  }
  grid.push_back(1.0);
  grid.push_back(1e-6);
  double err = 0.0;
  for (double delta : grid) {
    const double gap = RateNormal(delta, CrRate::Bits(0.0)) -
                       0.5 * std::log2(1.0 / delta);
    err = std::max(err, std::abs(gap - 0.5));
  }
  return {err <= 1e-12, Format("max |gap - 0.5| = %.2e", err)};
}

Outcome BivariateConsistency() {
  double err = 0.0;
  for (double delta : DeltaGrid()) {
    err = std::max(err, std::abs(RateBivariate(delta, 0.0) -
                                 RateNormal(delta, CrRate::Unbounded())));
  }
  double zero = 0.0;
  for (double eta : {-0.9, -0.5, -0.25, 0.25, 0.5, 0.9}) {
    zero = std::max(zero,
                    std::abs(RateBivariate(2.0 - 2.0 * std::abs(eta), eta)));
  }
  return {err <= 1e-12 && zero <= 1e-12,
          Format("eta=0 error %.2e, zero-rate error %.2e", err, zero)};
}

Outcome GaussianMonteCarlo() {
  const std::pair<double, double> cases[] = {{0.0, 1.0}, {0.5, 1.0},
                                             {0.9, 0.2}};
  double rho_err = 0.0, d_err = 0.0;
  std::uint64_t seed = 11;
  for (auto [eta, delta] : cases) {
    const double rho = MakeGaussianCandidate(delta, eta).rho;
    const McReport r = McVerifyBivariate(delta, eta, 1000000, seed++);
    rho_err = std::max(rho_err, std::abs(r.est_rho2 - rho * rho));
    d_err = std::max(d_err, std::abs(r.est_distortion - delta));
  }
  return {rho_err <= 0.004 && d_err <= 0.008,
          Format("max |rho2 error| %.4f, max |distortion error| %.4f", rho_err,
                 d_err)};
}

Outcome OracleEquivalence() {
  const char* settings[] = {"ed-marginal", "d-marginal", "ed-joint"};
  const double rcs[] = {0.0, 0.5, kUnbounded};
  double worst = 0.0;
  std::string where;
  for (int i = 0; i < 10; ++i) {
    CounterRng rng(0x6f7261636c65ULL, i);
    std::vector<double> p = testing::RandomSimplex(rng, 4);
    for (double& v : p) v = 0.02 + 0.92 * v;  // keep full support
    const double delta = 0.05 + 0.3 * rng.Uniform();
    for (const char* s : settings) {
      const RegionQuery q = Query(JointPmf({{"x", 2}, {"z", 2}}, p), s, delta,
                                  rcs[i % 3], 2, i);
      const double fast = MinRate(q).rate;
      const double oracle = BruteForceMinRate(q).rate;
      const double gap = std::abs(fast - oracle);
      if (gap > worst) {
        worst = gap;
        where = "instance " + std::to_string(i) + " " + s +
                Format(": %.4f vs %.4f", fast, oracle);
      }
    }
  }
  return {worst <= 0.02,
          Format("max |min_rate - oracle| = %.4f bits", worst) +
              (where.empty() ? "" : " (" + where + ")")};
}

Outcome BinaryBenchmark() {
  RegionQuery q =
      Query(JointPmf({{"x", 2}, {"z", 1}}, {0.5, 0.5}), "none", 0.0, kUnbounded);
  double worst = 0.0;
  for (double delta : {0.05, 0.11, 0.25}) {
    q.delta = delta;
    const double expected = 1.0 - BinaryEntropy(delta);
    worst = std::max({worst, std::abs(MinRate(q).rate - expected),
                      std::abs(BruteForceMinRate(q).rate - expected)});
  }
  return {worst <= 0.01,
          Format("max deviation from 1 - h(delta): %.2e bits (optimizer and "
                 "oracle)",
                 worst)};
}

Outcome StructuralIdentities() {
  const PropertyResult results[] = {
      testing::CheckIndependentShift(701, 500),
      testing::CheckSideInfoEmbedding(702, 500),
      testing::CheckEncoderSideDominance(703, 500),
      testing::CheckMarginalJointDominance(704, 500)};
  bool pass = true;
  std::string detail;
  const char* names[] = {"shift", "embedding", "ED<=D", "marginal<=joint"};
  for (int i = 0; i < 4; ++i) {
    pass = pass && results[i].instances >= 500 &&
           results[i].max_violation <= 1e-9;
    detail += names[i] + Format(" %.1e; ", results[i].max_violation);
  }
  return {pass, detail + "500 candidates each"};
}

// Shared scheme for the soft-covering and converse checks.
SchemeSpec CoveringSpec(double z_flip, double v_flip, int n,
                        std::uint64_t seed) {
  const double r =
      BinaryEntropy(z_flip * (1 - v_flip) + (1 - z_flip) * v_flip) -
      BinaryEntropy(v_flip) + 0.1;
  return MakeSchemeSpec(SchemeMode::kED, n, r, 0.0, 0.05,
                        BinaryChainCandidate(z_flip, v_flip),
                        DistortionMatrix::Hamming(2), seed);
}

Outcome SoftCovering() {
  std::vector<double> tv;
  std::string detail;
  double distortion = 0.0;
  for (int n : {4, 8, 12}) {
    const Selection sel = SelectCodebook(CoveringSpec(0.25, 0.1, n, 8), 8);
    tv.push_back(sel.analysis.tv_to_target);
    detail += Format("n=%g tv=%.4f; ", n, sel.analysis.tv_to_target);
    if (n == 12) {
      distortion = RunExperiment(*sel.codebook, 10000).mean_distortion;
    }
  }
  const double limit =
      ExpectedDistortion(BinaryChainCandidate(0.25, 0.1).joint.Marginal(
                             {"x", "y"}),
                         DistortionMatrix::Hamming(2)) +
      0.05;
  const bool monotone = tv[1] <= tv[0] && tv[2] <= tv[1];
  return {monotone && tv[2] < 0.25 && distortion <= limit,
          detail + Format("mean distortion %.4f (limit %.4f)", distortion,
                          limit)};
}

Outcome ConverseSanity() {
  const std::pair<double, double> flips[] = {
      {0.25, 0.1}, {0.2, 0.1}, {0.3, 0.1}, {0.25, 0.15}, {0.2, 0.05},
      {0.1, 0.1},  {0.3, 0.2}, {0.15, 0.1}, {0.25, 0.05}, {0.35, 0.1}};
  int violations = 0;
  double tightest = kUnbounded;
  for (auto [zf, vf] : flips) {
    for (int n : {4, 8}) {
      const SchemeSpec spec = CoveringSpec(zf, vf, n, 8);
      const Selection sel = SelectCodebook(spec, 8);
      const ExperimentReport rep = RunExperiment(*sel.codebook, 2000);
      const double tv = sel.analysis.tv_to_target;
      const RegionQuery q = Query(
          spec.candidate.joint.Marginal({"x", "z"}), "ed-marginal",
          std::min(spec.d.max(),
                   rep.mean_distortion + 2.0 * spec.d.max() * tv),
          spec.r_c);
      const double bound = MinRate(q).rate;
      const double rate = std::log2(static_cast<double>(spec.messages())) / n;
      const double slack = rate + spec.epsilon - bound;
      tightest = std::min(tightest, slack);
      if (std::getenv("RDPLAB_VERBOSE")) {
        std::printf("  z_flip=%.2f v_flip=%.2f n=%d rate=%.4f D=%.4f tv=%.4f "
                    "bound=%.4f\n",
                    zf, vf, n, rate, rep.mean_distortion, tv, bound);
      }
      if (slack < 0.0) ++violations;
    }
  }
  return {violations == 0,
          Format("%g violations over 20 configurations, tightest slack %.4f "
                 "bits",
                 violations, tightest)};
}

Outcome UpgraderExactness() {
  double dev = 0.0, tv_excess = 0.0, d_excess = 0.0;
  for (int i = 0; i < 50; ++i) {
    CounterRng rng(0x75706772ULL, i);
    const int n = 1 + i % 3;
    const Realism mode = i % 2 ? Realism::kJoint : Realism::kMarginal;
    const testing::RandomCode rc =
        testing::RandomInducedCode(rng, n, 2 + static_cast<int>(rng.Below(3)));
    const std::vector<double> target = ProductTarget(rc.p_xz, n, mode);
    const DistortionMatrix d = DistortionMatrix::Hamming(2);
    const UpgradeOutput out = Upgrade(rc.code, target, mode, d);
    const UpgradeDiagnostics& g = out.diagnostics;
    dev = std::max(dev, g.max_deviation);
    tv_excess = std::max(tv_excess, g.tv_p_pprime - g.tv_before);
    d_excess = std::max(d_excess, g.distortion_after - g.distortion_before -
                                      d.max() * g.tv_before);
  }
  return {dev <= 1e-12 && tv_excess <= 1e-12 && d_excess <= 1e-9,
          Format("max realism deviation %.1e, max TV excess %.1e, max "
                 "distortion excess %.1e",
                 dev, tv_excess, d_excess)};
}

Outcome LemmaSuite() {
  const PropertyResult results[] = {
      testing::CheckSameInputTv(1102, 1000),
      testing::CheckMarginalTvContraction(1106, 1000),
      testing::CheckSameChannelTv(1107, 1000),
      testing::CheckCouplingTv(1108, 1000),
      testing::CheckCriticBound(1109, 1000)};
  double worst = 0.0;
  bool pass = true;
  for (const PropertyResult& r : results) {
    pass = pass && r.instances >= 1000 && r.max_violation <= 1e-12;
    worst = std::max(worst, r.max_violation);
  }
  return {pass, Format("5 properties x 1000 instances, max violation %.1e",
                       worst)};
}

}  // namespace
}  // namespace rdplab

// Optional arguments select criteria by number; default is all.
int main(int argc, char** argv) {
  using rdplab::Outcome;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double time_limit;  // seconds
  };
  const double kNone = 1e30;
  const Criterion criteria[] = {
      {"gaussian closed forms", rdplab::GaussianClosedForms, 1.0},
      {"half-bit penalty without common randomness", rdplab::ThreeDbPenalty,
       kNone},
      {"bivariate gaussian consistency", rdplab::BivariateConsistency, kNone},
      {"gaussian monte carlo", rdplab::GaussianMonteCarlo, 30.0},
      {"region oracle equivalence", rdplab::OracleEquivalence, 600.0},
      {"binary perfect-realism benchmark", rdplab::BinaryBenchmark, kNone},
      {"structural identities", rdplab::StructuralIdentities, kNone},
      {"simulator soft covering", rdplab::SoftCovering, 300.0},
      {"upgrader exactness", rdplab::UpgraderExactness, 60.0},
      {"converse sanity", rdplab::ConverseSanity, kNone},
      {"tv and coupling properties", rdplab::LemmaSuite, kNone},
  };
  int failures = 0, index = 0;
  std::vector<bool> selected(std::size(criteria), argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= static_cast<int>(selected.size())) selected[k - 1] = true;
  }
  for (const auto& [name, run, time_limit] : criteria) {
    if (!selected[index++]) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    if (secs > time_limit) {
      o.pass = false;
      o.detail += " (time limit exceeded)";
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", index,
                name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
