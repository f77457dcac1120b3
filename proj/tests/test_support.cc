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

#include "test_support.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace rdplab::testing {
namespace {

void Track(PropertyResult& r, double violation, const std::string& what) {
  ++r.instances;
  if (violation > r.max_violation) {
    r.max_violation = violation;
    r.worst = what;
  }
}

std::string Describe(const char* what, int index) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s #%d", what, index);
  return buf;
}

int SizeIn(CounterRng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.Below(hi - lo + 1));
}

// p_w K as a joint over (w, l).
std::vector<double> Compose(const std::vector<double>& p_w, const Kernel& k) {
  std::vector<double> out(p_w.size() * k.output_size());
  for (std::size_t w = 0; w < p_w.size(); ++w) {
    for (int l = 0; l < k.output_size(); ++l) {
      out[w * k.output_size() + l] = p_w[w] * k(static_cast<int>(w), l);
    }
  }
  return out;
}

Setting MakeSetting(SideInfo side, Realism realism) {
  Setting s;
  s.side_info = side;
  s.realism = realism;
  return s;
}

}  // namespace

double BinaryEntropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::vector<double> RandomSimplex(CounterRng& rng, int size) {
  std::vector<double> p(size);
  double total = 0.0;
  for (double& v : p) total += v = -std::log(rng.Uniform());
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> RandomSparseSimplex(CounterRng& rng, int size,
                                        double sparsity) {
  std::vector<double> p(size);
  double total = 0.0;
  for (double& v : p) {
    v = rng.Uniform() < sparsity ? 0.0 : -std::log(rng.Uniform());
    total += v;
  }
  if (total <= 0.0) {
    p[rng.Below(size)] = 1.0;
    return p;
  }
  for (double& v : p) v /= total;
  return p;
}

JointPmf RandomJoint(CounterRng& rng, const std::vector<Axis>& axes) {
  int size = 1;
  for (const Axis& a : axes) size *= a.size;
  return JointPmf(axes, RandomSimplex(rng, size));
}

Kernel RandomKernel(CounterRng& rng, int in, int out) {
  std::vector<double> rows;
  for (int i = 0; i < in; ++i) {
    const std::vector<double> row = RandomSparseSimplex(rng, out, 0.25);
    rows.insert(rows.end(), row.begin(), row.end());
  }
  return Kernel(in, out, std::move(rows));
}

Candidate RandomFeasibleCandidate(CounterRng& rng, const JointPmf& p_xz,
                                  const Setting& setting, int v_size) {
  const JointPmf source = SourceForSetting(p_xz, setting);
  const int nx = source.axes()[0].size;
  const int nz = source.axes()[1].size;
  const int nv = v_size;
  const bool decoder_only = setting.decoder_only();
  const Kernel encoder = RandomKernel(rng, decoder_only ? nx : nx * nz, nv);
  const Kernel initial = RandomKernel(rng, nz * nv, nx);
  std::vector<double> channel(initial.data().begin(), initial.data().end());
  // Exact realism by surgery on the channel.
  std::vector<double> pw(nz * nv, 0.0);
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) {
      for (int v = 0; v < nv; ++v) {
        pw[z * nv + v] +=
            source.at({x, z}) * encoder(decoder_only ? x : x * nz + z, v);
      }
    }
  }
  if (setting.realism == Realism::kMarginal) {
    std::vector<double> p_x(nx, 0.0);
    for (int x = 0; x < nx; ++x) {
      for (int z = 0; z < nz; ++z) p_x[x] += source.at({x, z});
    }
    channel = RealismSurgery(pw, channel, p_x).kernel;
  } else {
    for (int z = 0; z < nz; ++z) {
      double pz = 0.0;
      for (int v = 0; v < nv; ++v) pz += pw[z * nv + v];
      if (pz <= 0.0) continue;
      std::vector<double> cond(nv), target(nx);
      for (int v = 0; v < nv; ++v) cond[v] = pw[z * nv + v] / pz;
      for (int x = 0; x < nx; ++x) target[x] = source.at({x, z}) / pz;
      const std::span<double> block(&channel[z * nv * nx], nv * nx);
      const SurgeryResult s = RealismSurgery(cond, block, target);
      std::copy(s.kernel.begin(), s.kernel.end(), block.begin());
    }
  }
  // Renormalize rows against round-off.
  for (int row = 0; row < nz * nv; ++row) {
    double total = 0.0;
    for (int y = 0; y < nx; ++y) total += channel[row * nx + y];
    for (int y = 0; y < nx; ++y) channel[row * nx + y] /= total;
  }
  const Kernel ch(nz * nv, nx, std::move(channel));
  return decoder_only ? MakeDecoderOnlyCandidate(source, encoder, ch)
                      : MakeCandidate(source, encoder, ch);
}

PropertyResult CheckMarginalTvContraction(std::uint64_t seed, int count) {
  PropertyResult r;
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const std::vector<Axis> axes = {{"w", SizeIn(rng, 2, 4)},
                                    {"l", SizeIn(rng, 2, 4)}};
    const JointPmf p = RandomJoint(rng, axes);
    const JointPmf q = RandomJoint(rng, axes);
    const double marginal = TvDistance(p.Marginal({"w"}), q.Marginal({"w"}));
    Track(r, std::max(0.0, marginal - TvDistance(p, q)),
          Describe("marginal contraction", i));
  }
  return r;
}

PropertyResult CheckSameChannelTv(std::uint64_t seed, int count) {
  PropertyResult r;
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const int nw = SizeIn(rng, 2, 5);
    const std::vector<double> p = RandomSparseSimplex(rng, nw, 0.2);
    const std::vector<double> q = RandomSparseSimplex(rng, nw, 0.2);
    const Kernel k = RandomKernel(rng, nw, SizeIn(rng, 2, 5));
    const double joint = TvDistance(Compose(p, k), Compose(q, k));
    Track(r, std::abs(joint - TvDistance(p, q)), Describe("same channel", i));
  }
  return r;
}

PropertyResult CheckSameInputTv(std::uint64_t seed, int count) {
  PropertyResult r;
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const int nw = SizeIn(rng, 2, 5);
    const int nl = SizeIn(rng, 2, 5);
    const std::vector<double> p = RandomSparseSimplex(rng, nw, 0.2);
    const Kernel k1 = RandomKernel(rng, nw, nl);
    const Kernel k2 = RandomKernel(rng, nw, nl);
    double expected = 0.0;
    for (int w = 0; w < nw; ++w) {
      expected += p[w] * TvDistance(k1.Row(w), k2.Row(w));
    }
    const double joint = TvDistance(Compose(p, k1), Compose(p, k2));
    Track(r, std::abs(joint - expected), Describe("same input", i));
  }
  return r;
}

PropertyResult CheckCouplingTv(std::uint64_t seed, int count) {
  PropertyResult r;
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const int nu = SizeIn(rng, 2, 4);
    const int nl = SizeIn(rng, 2, 3);
    // Random coupling of (U, W, L) with extra weight on U = W.
    std::vector<double> data(static_cast<std::size_t>(nu) * nu * nl);
    double total = 0.0;
    for (int u = 0; u < nu; ++u) {
      for (int w = 0; w < nu; ++w) {
        for (int l = 0; l < nl; ++l) {
          double v = -std::log(rng.Uniform());
          if (u == w) v *= 4.0;
          if (rng.Uniform() < 0.2) v = 0.0;
          data[(u * nu + w) * nl + l] = v;
          total += v;
        }
      }
    }
    for (double& v : data) v /= total;
    const JointPmf j({{"u", nu}, {"w", nu}, {"l", nl}}, std::move(data));
    double mismatch = 0.0;
    for (int u = 0; u < nu; ++u) {
      for (int w = 0; w < nu; ++w) {
        if (u == w) continue;
        for (int l = 0; l < nl; ++l) mismatch += j.at({u, w, l});
      }
    }
    const double tv = TvDistance(j.Marginal({"u", "l"}), j.Marginal({"w", "l"}));
    Track(r, std::max(0.0, tv - mismatch), Describe("coupling", i));
  }
  return r;
}

PropertyResult CheckCriticBound(std::uint64_t seed, int count) {
  PropertyResult r;
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const int k = SizeIn(rng, 2, 8);
    const std::vector<double> p = RandomSparseSimplex(rng, k, 0.2);
    const std::vector<double> q = RandomSparseSimplex(rng, k, 0.2);
    // Exhaustive search over decision regions "say P".
    double best = 0.0;
    for (int mask = 0; mask < (1 << k); ++mask) {
      double acc = 0.0;
      for (int s = 0; s < k; ++s) {
        acc += (mask >> s & 1) ? 0.5 * p[s] : 0.5 * q[s];
      }
      best = std::max(best, acc);
    }
    Track(r, std::abs(best - (0.5 + 0.5 * TvDistance(p, q))),
          Describe("critic", i));
  }
  return r;
}

PropertyResult CheckChainRule(std::uint64_t seed, int count) {
  PropertyResult r;
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const JointPmf j = RandomJoint(
        rng, {{"a", SizeIn(rng, 2, 4)}, {"b", SizeIn(rng, 2, 4)},
              {"c", SizeIn(rng, 2, 4)}});
    const double lhs = MutualInformation(j, {"a"}, {"b", "c"});
    const double rhs = MutualInformation(j, {"a"}, {"b"}) +
                       ConditionalMutualInformation(j, {"a"}, {"c"}, {"b"});
    Track(r, std::abs(lhs - rhs), Describe("chain rule", i));
  }
  return r;
}

PropertyResult CheckIndependentShift(std::uint64_t seed, int count) {
  PropertyResult r;
  const Setting ed = MakeSetting(SideInfo::kBoth, Realism::kMarginal);
  const Setting none = MakeSetting(SideInfo::kNone, Realism::kMarginal);
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const int nx = SizeIn(rng, 2, 3);
    const int nz = SizeIn(rng, 2, 3);
    const std::vector<double> px = RandomSimplex(rng, nx);
    const std::vector<double> pz = RandomSimplex(rng, nz);
    std::vector<double> data;
    for (int x = 0; x < nx; ++x) {
      for (int z = 0; z < nz; ++z) data.push_back(px[x] * pz[z]);
    }
    const JointPmf p_xz({{"x", nx}, {"z", nz}}, std::move(data));
    const Candidate c =
        RandomFeasibleCandidate(rng, p_xz, ed, SizeIn(rng, 2, 3));
    const DistortionMatrix d = DistortionMatrix::Hamming(nx);
    const RatePoint a = EvaluateBounds(c, ed, d);
    const RatePoint b = EvaluateBoundsUnchecked(EmbedSideInfo(c), none, d);
    const double h_z = Entropy(p_xz, {"z"});
    Track(r,
          std::max({std::abs(b.r - a.r), std::abs(b.r_sum - (a.r_sum + h_z)),
                    std::abs(b.delta - a.delta)}),
          Describe("independent shift", i));
  }
  return r;
}

PropertyResult CheckSideInfoEmbedding(std::uint64_t seed, int count) {
  PropertyResult r;
  const Setting ed = MakeSetting(SideInfo::kBoth, Realism::kMarginal);
  const Setting none = MakeSetting(SideInfo::kNone, Realism::kMarginal);
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const int nx = SizeIn(rng, 2, 3);
    const int nz = SizeIn(rng, 2, 3);
    const JointPmf p_xz = RandomJoint(rng, {{"x", nx}, {"z", nz}});
    const Candidate c =
        RandomFeasibleCandidate(rng, p_xz, ed, SizeIn(rng, 2, 3));
    const DistortionMatrix d = DistortionMatrix::Hamming(nx);
    const RatePoint a = EvaluateBounds(c, ed, d);
    const Candidate w = EmbedSideInfo(c);
    const double infeasible = CheckFeasible(w, none, w.joint.Marginal({"x", "z"}))
                                      .empty()
                                  ? 0.0
                                  : 1.0;
    const RatePoint b = EvaluateBoundsUnchecked(w, none, d);
    const double i_xz = MutualInformation(p_xz);
    const double h_z = Entropy(p_xz, {"z"});
    Track(r,
          std::max({infeasible, std::abs(b.r - (a.r + i_xz)),
                    std::abs(b.r_sum - (a.r_sum + h_z)),
                    std::abs(b.delta - a.delta)}),
          Describe("side-information embedding", i));
  }
  return r;
}

PropertyResult CheckEncoderSideDominance(std::uint64_t seed, int count) {
  PropertyResult r;
  const Setting ed = MakeSetting(SideInfo::kBoth, Realism::kMarginal);
  const Setting dm = MakeSetting(SideInfo::kDecoder, Realism::kMarginal);
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const int nx = SizeIn(rng, 2, 3);
    const int nz = SizeIn(rng, 2, 3);
    const JointPmf p_xz = RandomJoint(rng, {{"x", nx}, {"z", nz}});
    const Candidate c =
        RandomFeasibleCandidate(rng, p_xz, dm, SizeIn(rng, 2, 3));
    const DistortionMatrix d = DistortionMatrix::Hamming(nx);
    const RatePoint under_d = EvaluateBounds(c, dm, d);
    const RatePoint under_ed = EvaluateBounds(c, ed, d);
    Track(r,
          std::max({0.0, under_ed.r - under_d.r,
                    under_ed.r_sum - under_d.r_sum}),
          Describe("encoder side information dominance", i));
  }
  return r;
}

PropertyResult CheckMarginalJointDominance(std::uint64_t seed, int count) {
  PropertyResult r;
  const Setting marginal = MakeSetting(SideInfo::kBoth, Realism::kMarginal);
  const Setting joint = MakeSetting(SideInfo::kBoth, Realism::kJoint);
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const int nx = SizeIn(rng, 2, 3);
    const int nz = SizeIn(rng, 2, 3);
    const JointPmf p_xz = RandomJoint(rng, {{"x", nx}, {"z", nz}});
    const Candidate c =
        RandomFeasibleCandidate(rng, p_xz, joint, SizeIn(rng, 2, 3));
    const DistortionMatrix d = DistortionMatrix::Hamming(nx);
    const RatePoint under_joint = EvaluateBounds(c, joint, d);
    const double infeasible =
        CheckFeasible(c, marginal, p_xz).empty() ? 0.0 : 1.0;
    const RatePoint under_marginal = EvaluateBoundsUnchecked(c, marginal, d);
    Track(r,
          std::max({infeasible, std::abs(under_marginal.r - under_joint.r),
                    under_marginal.r_sum - under_joint.r_sum}),
          Describe("marginal/joint dominance", i));
  }
  return r;
}

RandomCode RandomInducedCode(CounterRng& rng, int n, int m_size) {
  const JointPmf p_xz = RandomJoint(rng, {{"x", 2}, {"z", 2}});
  int block = 1;
  for (int t = 0; t < n; ++t) block *= 2;
  const Kernel encoder = RandomKernel(rng, block * block, m_size);
  const Kernel decoder = RandomKernel(rng, block * m_size, block);
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(block) * block * m_size * block);
  for (int xi = 0; xi < block; ++xi) {
    const std::vector<int> x = BlockLetters(xi, n, 2);
    for (int zi = 0; zi < block; ++zi) {
      const std::vector<int> z = BlockLetters(zi, n, 2);
      double p = 1.0;
      for (int t = 0; t < n; ++t) p *= p_xz.at({x[t], z[t]});
      for (int m = 0; m < m_size; ++m) {
        for (int yi = 0; yi < block; ++yi) {
          data.push_back(p * encoder(xi * block + zi, m) *
                         decoder(zi * m_size + m, yi));
        }
      }
    }
  }
  // Absorb round-off so the table passes the mass check.
  double total = 0.0;
  for (double v : data) total += v;
  for (double& v : data) v /= total;
  return {p_xz,
          InducedCode{JointPmf({{"xn", block},
                                {"zn", block},
                                {"m", m_size},
                                {"yn", block}},
                               std::move(data)),
                      n, 2, 2, 2, "random"}};
}

Candidate BinaryChainCandidate(double z_flip, double v_flip) {
  std::vector<double> data(16, 0.0);
  for (int x = 0; x < 2; ++x) {
    for (int z = 0; z < 2; ++z) {
      for (int v = 0; v < 2; ++v) {
        const double pz = z == x ? 1.0 - z_flip : z_flip;
        const double pv = v == x ? 1.0 - v_flip : v_flip;
        data[((x * 2 + z) * 2 + v) * 2 + v] = 0.5 * pz * pv;
      }
    }
  }
  return CandidateFromJoint(
      JointPmf({{"x", 2}, {"z", 2}, {"v", 2}, {"y", 2}}, std::move(data)));
}

}  // namespace rdplab::testing
