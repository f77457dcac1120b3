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

// Independent oracle for the region optimizer.
//
// For a fixed encoder the remaining problem over the decoder channel is
// convex: the sum-rate term is a KL divergence to a product (or, for the
// decoder-only marginal case, a variational KL with an auxiliary backward
// kernel), the realism constraints fix the marginals of a coupling and the
// distortion is linear. It is solved exactly by entropic projection with a
// bisection on the distortion multiplier. The encoder itself is enumerated
// on a simplex mesh and the best mesh points are refined by pattern search.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "rdplab/error.h"
#include "rdplab/regions.h"
#include "rdplab/transport.h"
#include "region_internal.h"

namespace rdplab {
namespace {

using internal::Dims;

constexpr double kInfeasibleRate = kUnbounded;

struct OracleProblem {
  Dims dims;
  Setting setting;
  double delta = 0.0;
  double r_c = kUnbounded;
  std::vector<double> pxz;  // nx * nz
  std::vector<double> px;   // nx
  std::vector<double> pz;   // nz
  std::vector<double> d;    // nx * ny
  internal::BoundTerms terms;
  Dims xzv;                 // dims with a trivial Y axis
  std::vector<std::vector<int>> r_maps;
  std::vector<int> r_sizes;

  bool decoder_only() const { return setting.decoder_only(); }
  bool joint_realism() const { return setting.realism == Realism::kJoint; }
  int encoder_rows() const {
    return decoder_only() ? dims.nx : dims.nx * dims.nz;
  }
};

OracleProblem MakeOracleProblem(const RegionQuery& q) {
  OracleProblem p;
  const JointPmf source = SourceForSetting(q.p_xz, q.setting);
  p.setting = q.setting;
  p.delta = q.delta;
  p.r_c = q.r_c;
  p.dims = {source.axes()[0].size, source.axes()[1].size, DefaultVSize(q),
            q.d.cols()};
  Require(q.d.rows() == p.dims.nx && q.d.cols() == p.dims.nx,
          "realism needs a square distortion matrix matching X");
  p.pxz.assign(source.data().begin(), source.data().end());
  p.px.assign(p.dims.nx, 0.0);
  p.pz.assign(p.dims.nz, 0.0);
  for (int x = 0; x < p.dims.nx; ++x) {
    for (int z = 0; z < p.dims.nz; ++z) {
      p.px[x] += p.pxz[x * p.dims.nz + z];
      p.pz[z] += p.pxz[x * p.dims.nz + z];
    }
  }
  p.d.assign(q.d.data().begin(), q.d.data().end());
  p.terms = internal::TermsFor(q.setting);
  p.xzv = {p.dims.nx, p.dims.nz, p.dims.nv, 1};
  p.r_maps.resize(16);
  p.r_sizes.resize(16);
  for (const auto& [mask, coef] : p.terms.r) {
    p.r_maps[mask] = internal::MarginalIndex(p.xzv, mask);
    p.r_sizes[mask] = internal::MaskSize(p.xzv, mask);
  }
  return p;
}

std::vector<double> EncoderJoint(const OracleProblem& p,
                                 const std::vector<double>& enc) {
  const Dims& dm = p.dims;
  std::vector<double> j(static_cast<std::size_t>(dm.nx) * dm.nz * dm.nv);
  for (int x = 0; x < dm.nx; ++x) {
    for (int z = 0; z < dm.nz; ++z) {
      const double* row = &enc[(p.decoder_only() ? x : x * dm.nz + z) * dm.nv];
      for (int v = 0; v < dm.nv; ++v) {
        j[(x * dm.nz + z) * dm.nv + v] = p.pxz[x * dm.nz + z] * row[v];
      }
    }
  }
  return j;
}

double RateBound(const OracleProblem& p, const std::vector<double>& pxzv) {
  double total = 0.0;
  std::vector<double> m;
  for (const auto& [mask, coef] : p.terms.r) {
    m.assign(p.r_sizes[mask], 0.0);
    const auto& map = p.r_maps[mask];
    for (std::size_t k = 0; k < pxzv.size(); ++k) m[map[k]] += pxzv[k];
    double h = 0.0;
    for (double v : m) {
      if (v > 0.0) h -= v * std::log2(v);
    }
    total += coef * h;
  }
  return total;
}

// Coupling data for a fixed encoder: rows u = (z, v), columns y.
struct CouplingData {
  std::vector<double> a;     // p(z, v)
  std::vector<double> cost;  // E[d(X, y) | z, v]
};

CouplingData MakeCoupling(const OracleProblem& p,
                          const std::vector<double>& pxzv) {
  const Dims& dm = p.dims;
  CouplingData c;
  c.a.assign(dm.nz * dm.nv, 0.0);
  c.cost.assign(static_cast<std::size_t>(dm.nz) * dm.nv * dm.ny, 0.0);
  for (int x = 0; x < dm.nx; ++x) {
    for (int z = 0; z < dm.nz; ++z) {
      for (int v = 0; v < dm.nv; ++v) {
        const double w = pxzv[(x * dm.nz + z) * dm.nv + v];
        const int u = z * dm.nv + v;
        c.a[u] += w;
        for (int y = 0; y < dm.ny; ++y) c.cost[u * dm.ny + y] += w * p.d[x * dm.ny + y];
      }
    }
  }
  for (int u = 0; u < dm.nz * dm.nv; ++u) {
    for (int y = 0; y < dm.ny; ++y) {
      c.cost[u * dm.ny + y] = c.a[u] > 0.0 ? c.cost[u * dm.ny + y] / c.a[u] : 0.0;
    }
  }
  return c;
}

// Per-z slices of the coupling for joint realism.
struct Slice {
  double pz = 0.0;
  std::vector<double> a, b, cost;
};

std::vector<Slice> Slices(const OracleProblem& p, const CouplingData& c) {
  const Dims& dm = p.dims;
  std::vector<Slice> out(dm.nz);
  for (int z = 0; z < dm.nz; ++z) {
    Slice& s = out[z];
    s.pz = p.pz[z];
    s.a.assign(dm.nv, 0.0);
    s.b.assign(dm.ny, 0.0);
    s.cost.assign(c.cost.begin() + z * dm.nv * dm.ny,
                  c.cost.begin() + (z + 1) * dm.nv * dm.ny);
    if (s.pz <= 0.0) continue;
    for (int v = 0; v < dm.nv; ++v) s.a[v] = c.a[z * dm.nv + v] / s.pz;
    for (int y = 0; y < dm.ny; ++y) s.b[y] = p.pxz[y * dm.nz + z] / s.pz;
  }
  return out;
}

double PlanCost(const std::vector<double>& plan, const std::vector<double>& cost) {
  double total = 0.0;
  for (std::size_t k = 0; k < plan.size(); ++k) total += plan[k] * cost[k];
  return total;
}

// Minimal distortion of any realism-feasible channel for this encoder.
double FeasibilityCost(const OracleProblem& p, const CouplingData& c,
                       std::vector<double>* plan) {
  if (!p.joint_realism()) {
    TransportPlan t = MinCostTransport(c.a, p.px, c.cost);
    if (plan) *plan = std::move(t.plan);
    return t.cost;
  }
  const Dims& dm = p.dims;
  double total = 0.0;
  if (plan) plan->assign(c.cost.size(), 0.0);
  const auto slices = Slices(p, c);
  for (int z = 0; z < dm.nz; ++z) {
    const Slice& s = slices[z];
    if (s.pz <= 0.0) continue;
    const TransportPlan t = MinCostTransport(s.a, s.b, s.cost);
    total += s.pz * t.cost;
    if (plan) {
      for (std::size_t k = 0; k < t.plan.size(); ++k) {
        (*plan)[z * dm.nv * dm.ny + k] = s.pz * t.plan[k];
      }
    }
  }
  return total;
}

// A joint coupling pi(u, y) over all (z, v) rows.
struct InnerSolution {
  std::vector<double> plan;
  double distortion = 0.0;
};

// Finds the smallest multiplier whose solution meets the distortion budget.
// Returns false when no multiplier up to 2^20 does.
bool LambdaSearch(const std::function<InnerSolution(double)>& solve,
                  double delta, InnerSolution* out) {
  InnerSolution s0 = solve(0.0);
  if (s0.distortion <= delta) {
    *out = std::move(s0);
    return true;
  }
  double lo = 0.0, hi = 1.0;
  InnerSolution best;
  bool found = false;
  for (int k = 0; k < 21; ++k) {
    InnerSolution s = solve(hi);
    if (s.distortion <= delta) {
      best = std::move(s);
      found = true;
      break;
    }
    lo = hi;
    hi *= 2.0;
  }
  if (!found) return false;
  for (int k = 0; k < 40 && hi - lo > 1e-10 * hi; ++k) {
    if (best.distortion >= delta - 1e-11) break;
    const double mid = 0.5 * (lo + hi);
    InnerSolution s = solve(mid);
    if (s.distortion <= delta) {
      hi = mid;
      best = std::move(s);
    } else {
      lo = mid;
    }
  }
  *out = std::move(best);
  return true;
}

SinkhornOptions InnerSinkhorn() {
  SinkhornOptions o;
  o.max_iterations = 3000;
  o.tolerance = 1e-11;
  return o;
}

// Entropic solution at multiplier lambda for the sum-rate term of the
// setting, warm-started through `state`.
struct InnerState {
  std::vector<double> g;
  std::vector<std::vector<double>> slice_g;
  std::vector<double> backward;  // w(z | v, y) as (z, v, y), decoder-only
};

InnerSolution EntropicSolve(const OracleProblem& p, const CouplingData& c,
                            double lambda, InnerState& state) {
  const Dims& dm = p.dims;
  const int nu = dm.nz * dm.nv;
  InnerSolution out;
  if (p.joint_realism()) {
    const auto slices = Slices(p, c);
    state.slice_g.resize(dm.nz);
    out.plan.assign(static_cast<std::size_t>(nu) * dm.ny, 0.0);
    for (int z = 0; z < dm.nz; ++z) {
      const Slice& s = slices[z];
      if (s.pz <= 0.0) continue;
      std::vector<double> log_ref(s.cost.size());
      for (std::size_t k = 0; k < log_ref.size(); ++k) log_ref[k] = -lambda * s.cost[k];
      SinkhornResult r = SinkhornProject(log_ref, s.a, s.b, InnerSinkhorn(),
                                         &state.slice_g[z]);
      state.slice_g[z] = r.g;
      for (std::size_t k = 0; k < r.plan.size(); ++k) {
        out.plan[z * dm.nv * dm.ny + k] = s.pz * r.plan[k];
      }
    }
    out.distortion = PlanCost(out.plan, c.cost);
    return out;
  }
  if (!(p.decoder_only() && std::isfinite(p.r_c))) {
    std::vector<double> log_ref(c.cost.size());
    for (std::size_t k = 0; k < log_ref.size(); ++k) log_ref[k] = -lambda * c.cost[k];
    SinkhornResult r = SinkhornProject(log_ref, c.a, p.px, InnerSinkhorn(), &state.g);
    state.g = r.g;
    out.plan = std::move(r.plan);
    out.distortion = PlanCost(out.plan, c.cost);
    return out;
  }
  // Decoder-only marginal: min I(Y;V) = min over (pi, w) of
  // KL(pi_{Z,V,Y} || p_V p_Y w(z|v,y)), alternating in w and pi.
  if (state.backward.empty()) {
    state.backward.assign(static_cast<std::size_t>(nu) * dm.ny, 0.0);
    for (int u = 0; u < nu; ++u) {
      const int v = u % dm.nv;
      double pv = 0.0;
      for (int z = 0; z < dm.nz; ++z) pv += c.a[z * dm.nv + v];
      for (int y = 0; y < dm.ny; ++y) {
        state.backward[u * dm.ny + y] = pv > 0.0 ? c.a[u] / pv : 0.0;
      }
    }
  }
  std::vector<double> log_ref(c.cost.size());
  std::vector<double> previous;
  for (int it = 0; it < 400; ++it) {
    for (std::size_t k = 0; k < log_ref.size(); ++k) {
      const double w = state.backward[k];
      log_ref[k] = (w > 0.0 ? std::log(w) : -kUnbounded) - lambda * c.cost[k];
    }
    SinkhornResult r = SinkhornProject(log_ref, c.a, p.px, InnerSinkhorn(), &state.g);
    state.g = r.g;
    out.plan = std::move(r.plan);
    // w(z | v, y) = pi(z, v, y) / sum_z pi(z, v, y).
    for (int v = 0; v < dm.nv; ++v) {
      for (int y = 0; y < dm.ny; ++y) {
        double total = 0.0;
        for (int z = 0; z < dm.nz; ++z) total += out.plan[(z * dm.nv + v) * dm.ny + y];
        for (int z = 0; z < dm.nz; ++z) {
          const int k = (z * dm.nv + v) * dm.ny + y;
          state.backward[k] = total > 0.0 ? out.plan[k] / total : 0.0;
        }
      }
    }
    if (!previous.empty()) {
      double change = 0.0;
      for (std::size_t k = 0; k < previous.size(); ++k) {
        change = std::max(change, std::fabs(previous[k] - out.plan[k]));
      }
      if (change < 1e-11) break;
    }
    previous = out.plan;
  }
  out.distortion = PlanCost(out.plan, c.cost);
  return out;
}

struct Evaluation {
  double rate = kInfeasibleRate;
  std::vector<double> channel;  // (z, v) rows
};

std::vector<double> ChannelFromPlan(const OracleProblem& p,
                                    const std::vector<double>& plan,
                                    const std::vector<double>& a) {
  const Dims& dm = p.dims;
  std::vector<double> ch(plan.size());
  for (int u = 0; u < dm.nz * dm.nv; ++u) {
    double total = 0.0;
    for (int y = 0; y < dm.ny; ++y) total += plan[u * dm.ny + y];
    for (int y = 0; y < dm.ny; ++y) {
      ch[u * dm.ny + y] = total > 0.0 && a[u] > 0.0 ? plan[u * dm.ny + y] / total
                                                    : 1.0 / dm.ny;
    }
  }
  return ch;
}

// Exact realism on a channel built from an approximately balanced plan.
void Polish(const OracleProblem& p, const CouplingData& c,
            std::vector<double>& channel) {
  const Dims& dm = p.dims;
  if (!p.joint_realism()) {
    channel = RealismSurgery(c.a, channel, p.px).kernel;
    return;
  }
  for (int z = 0; z < dm.nz; ++z) {
    if (p.pz[z] <= 0.0) continue;
    std::vector<double> cond(dm.nv), target(dm.ny);
    for (int v = 0; v < dm.nv; ++v) cond[v] = c.a[z * dm.nv + v] / p.pz[z];
    for (int y = 0; y < dm.ny; ++y) target[y] = p.pxz[y * dm.nz + z] / p.pz[z];
    std::span<double> block(&channel[z * dm.nv * dm.ny], dm.nv * dm.ny);
    const auto fixed = RealismSurgery(cond, block, target);
    std::copy(fixed.kernel.begin(), fixed.kernel.end(), block.begin());
  }
}

double SumBound(const OracleProblem& p, const std::vector<double>& enc,
                const std::vector<double>& channel) {
  const std::vector<double> joint =
      internal::BuildJoint(p.dims, p.pxz, enc, channel, p.decoder_only());
  return internal::TermsValue(p.dims, joint, p.terms.s);
}

// Full evaluation of one encoder: rate and an optimal channel.
Evaluation Evaluate(const OracleProblem& p, const std::vector<double>& enc,
                    double prune_above = kUnbounded) {
  Evaluation e;
  const std::vector<double> pxzv = EncoderJoint(p, enc);
  const double r = RateBound(p, pxzv);
  if (r >= prune_above) return e;
  const CouplingData c = MakeCoupling(p, pxzv);
  std::vector<double> plan;
  if (FeasibilityCost(p, c, &plan) > p.delta + 1e-12) return e;
  if (!std::isfinite(p.r_c)) {
    e.rate = std::max(0.0, r);
    e.channel = ChannelFromPlan(p, plan, c.a);
    return e;
  }
  InnerState state;
  InnerSolution sol;
  if (!LambdaSearch([&](double lambda) { return EntropicSolve(p, c, lambda, state); },
                    p.delta, &sol)) {
    return e;
  }
  e.channel = ChannelFromPlan(p, sol.plan, c.a);
  Polish(p, c, e.channel);
  e.rate = std::max({0.0, r, SumBound(p, enc, e.channel) - p.r_c});
  return e;
}

// All compositions of `steps` into `parts` nonnegative integers.
std::vector<std::vector<int>> Compositions(int steps, int parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(parts, 0);
  std::function<void(int, int)> rec = [&](int k, int left) {
    if (k == parts - 1) {
      cur[k] = left;
      out.push_back(cur);
      return;
    }
    for (int i = left; i >= 0; --i) {
      cur[k] = i;
      rec(k + 1, left - i);
    }
  };
  rec(0, steps);
  return out;
}

double Binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// Relabeling V permutes encoder columns; keep one representative per orbit.
bool Canonical(const std::vector<double>& enc, int rows, int nv) {
  for (int v = 0; v + 1 < nv; ++v) {
    for (int r = 0; r < rows; ++r) {
      const double a = enc[r * nv + v], b = enc[r * nv + v + 1];
      if (a > b) break;
      if (a < b) return false;
    }
  }
  return true;
}

}  // namespace

RatePoint BruteForceMinRate(const RegionQuery& q, const OracleConfig& config) {
  Require(q.delta >= 0.0 && q.r_c >= 0.0, "delta and r_c must be nonnegative");
  const OracleProblem p = MakeOracleProblem(q);
  const Dims& dm = p.dims;
  const int rows = p.encoder_rows();
  int steps = 0;
  for (int k : {32, 16, 8, 4}) {
    const double per_row = Binomial(k + dm.nv - 1, dm.nv - 1);
    const double points = std::pow(per_row, rows);
    if (points <= static_cast<double>(config.max_points)) {
      steps = k;
      break;
    }
    if (k == 4) {
      if (points > 1e7) {
        Fail(ErrorCode::kCapExceeded,
             "oracle grid too large: " + FormatReal(points) +
                 " encoder mesh points at step 1/4");
      }
      steps = 4;
    }
  }
  const auto comps = Compositions(steps, dm.nv);
  const int per_row = static_cast<int>(comps.size());

  // Pass 1: rate bound of every canonical mesh point.
  struct MeshPoint {
    double r;
    long long index;
  };
  std::vector<MeshPoint> mesh;
  long long total = 1;
  for (int r = 0; r < rows; ++r) total *= per_row;
  std::vector<double> enc(static_cast<std::size_t>(rows) * dm.nv);
  auto decode = [&](long long index) {
    for (int r = rows - 1; r >= 0; --r) {
      const auto& comp = comps[index % per_row];
      index /= per_row;
      for (int v = 0; v < dm.nv; ++v) enc[r * dm.nv + v] = comp[v] / double(steps);
    }
  };
  for (long long index = 0; index < total; ++index) {
    decode(index);
    if (!Canonical(enc, rows, dm.nv)) continue;
    mesh.push_back({RateBound(p, EncoderJoint(p, enc)), index});
  }
  std::sort(mesh.begin(), mesh.end(), [](const MeshPoint& a, const MeshPoint& b) {
    return a.r < b.r || (a.r == b.r && a.index < b.index);
  });

  // Pass 2: full evaluation in increasing rate-bound order, keeping the best
  // few; points whose bound alone exceeds the current k-th best are skipped.
  struct Best {
    double rate;
    std::vector<double> enc;
  };
  std::vector<Best> best;
  const int keep = std::max(1, config.refine_starts);
  auto kth = [&] {
    return static_cast<int>(best.size()) < keep ? kUnbounded : best.back().rate;
  };
  for (const MeshPoint& m : mesh) {
    if (m.r >= kth()) break;
    decode(m.index);
    const Evaluation e = Evaluate(p, enc, kth());
    if (!(e.rate < kth())) continue;
    best.push_back({e.rate, enc});
    std::sort(best.begin(), best.end(),
              [](const Best& a, const Best& b) { return a.rate < b.rate; });
    if (static_cast<int>(best.size()) > keep) best.pop_back();
  }
  if (best.empty()) {
    Fail(ErrorCode::kInfeasible, "no encoder on the oracle mesh meets delta " +
                                     FormatReal(q.delta));
  }

  // Pass 3: pattern search from each retained point.
  Best winner = best.front();
  for (Best start : best) {
    double h = 0.5 / steps;
    while (h >= 1e-5) {
      bool improved = true;
      for (int sweep = 0; sweep < 60 && improved; ++sweep) {
        improved = false;
        for (int r = 0; r < rows; ++r) {
          for (int i = 0; i < dm.nv; ++i) {
            for (int j = 0; j < dm.nv; ++j) {
              if (i == j) continue;
              const double move = std::min(h, start.enc[r * dm.nv + i]);
              if (move <= 0.0) continue;
              std::vector<double> trial = start.enc;
              trial[r * dm.nv + i] -= move;
              trial[r * dm.nv + j] += move;
              const Evaluation e = Evaluate(p, trial);
              if (e.rate < start.rate - 1e-12) {
                start.rate = e.rate;
                start.enc = std::move(trial);
                improved = true;
              }
            }
          }
        }
        // Paired moves in two rows at once, so the search can slide along
        // an active distortion constraint.
        for (int r1 = 0; r1 < rows && !improved; ++r1) {
          for (int r2 = r1 + 1; r2 < rows; ++r2) {
            for (int m1 = 0; m1 < dm.nv * dm.nv; ++m1) {
              const int i1 = m1 / dm.nv, j1 = m1 % dm.nv;
              if (i1 == j1) continue;
              for (int m2 = 0; m2 < dm.nv * dm.nv; ++m2) {
                const int i2 = m2 / dm.nv, j2 = m2 % dm.nv;
                if (i2 == j2) continue;
                const double move = std::min(
                    {h, start.enc[r1 * dm.nv + i1], start.enc[r2 * dm.nv + i2]});
                if (move <= 0.0) continue;
                std::vector<double> trial = start.enc;
                trial[r1 * dm.nv + i1] -= move;
                trial[r1 * dm.nv + j1] += move;
                trial[r2 * dm.nv + i2] -= move;
                trial[r2 * dm.nv + j2] += move;
                const Evaluation e = Evaluate(p, trial);
                if (e.rate < start.rate - 1e-12) {
                  start.rate = e.rate;
                  start.enc = std::move(trial);
                  improved = true;
                }
              }
            }
          }
        }
      }
      h *= 0.5;
    }
    if (start.rate < winner.rate) winner = start;
  }

  const Evaluation e = Evaluate(p, winner.enc);
  const JointPmf source = SourceForSetting(q.p_xz, q.setting);
  const std::vector<double> joint =
      internal::BuildJoint(dm, p.pxz, winner.enc, e.channel, p.decoder_only());
  long double mass = 0.0L;
  for (double v : joint) mass += v;
  std::vector<double> normalized(joint.size());
  for (std::size_t k = 0; k < joint.size(); ++k) {
    normalized[k] = static_cast<double>(joint[k] / mass);
  }
  Candidate c{JointPmf({{"x", dm.nx}, {"z", dm.nz}, {"v", dm.nv}, {"y", dm.ny}},
                       std::move(normalized))};
  RatePoint out = EvaluateBoundsUnchecked(c, q.setting, q.d, q.r_c);
  out.restarts = static_cast<int>(best.size());
  out.converged = true;
  if (out.boundary_kind == "inner-bound" &&
      FindCommonComponent(q.p_xz).hypothesis_holds) {
    out.boundary_kind = "boundary";
  }
  return out;
}

ConditionalMiResult MinConditionalMi(const JointPmf& p_xz,
                                     const DistortionMatrix& d, double delta,
                                     std::optional<Realism> realism) {
  Require(p_xz.rank() == 2, "p_xz must have two axes");
  const int nx = p_xz.axes()[0].size;
  const int nz = p_xz.axes()[1].size;
  const int ny = d.cols();
  Require(d.rows() == nx, "distortion rows must match X");
  if (realism) Require(ny == nx, "realism needs a square distortion matrix");
  Require(delta >= 0.0, "delta must be nonnegative");
  const std::vector<double> pxz(p_xz.data().begin(), p_xz.data().end());
  std::vector<double> px(nx, 0.0), pz(nz, 0.0);
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) {
      px[x] += pxz[x * nz + z];
      pz[z] += pxz[x * nz + z];
    }
  }
  // Rows u = (x, z); cost d(x, y).
  const int nu = nx * nz;
  std::vector<double> cost(static_cast<std::size_t>(nu) * ny);
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) {
      for (int y = 0; y < ny; ++y) cost[(x * nz + z) * ny + y] = d(x, y);
    }
  }
  // Feasibility floor.
  double floor = 0.0;
  if (!realism) {
    for (int x = 0; x < nx; ++x) {
      double m = kUnbounded;
      for (int y = 0; y < ny; ++y) m = std::min(m, d(x, y));
      floor += px[x] * m;
    }
  } else if (*realism == Realism::kMarginal) {
    floor = MinCostTransport(px, px, d.data()).cost;
  } else {
    for (int z = 0; z < nz; ++z) {
      if (pz[z] <= 0.0) continue;
      std::vector<double> col(nx);
      for (int x = 0; x < nx; ++x) col[x] = pxz[x * nz + z] / pz[z];
      floor += pz[z] * MinCostTransport(col, col, d.data()).cost;
    }
  }
  if (floor > delta + 1e-12) {
    Fail(ErrorCode::kInfeasible, "delta " + FormatReal(delta) +
                                     " is below the attainable distortion " +
                                     FormatReal(floor));
  }
  std::vector<double> w(static_cast<std::size_t>(nz) * ny, 1.0 / ny);  // w(y|z)
  std::vector<double> g;
  auto solve = [&](double lambda) {
    InnerSolution out;
    out.plan.assign(cost.size(), 0.0);
    if (realism && *realism == Realism::kJoint) {
      for (int z = 0; z < nz; ++z) {
        if (pz[z] <= 0.0) continue;
        std::vector<double> a(nx), log_ref(static_cast<std::size_t>(nx) * ny);
        for (int x = 0; x < nx; ++x) a[x] = pxz[x * nz + z] / pz[z];
        for (int x = 0; x < nx; ++x) {
          for (int y = 0; y < ny; ++y) log_ref[x * ny + y] = -lambda * d(x, y);
        }
        SinkhornResult r = SinkhornProject(log_ref, a, a, InnerSinkhorn());
        for (int x = 0; x < nx; ++x) {
          for (int y = 0; y < ny; ++y) {
            out.plan[(x * nz + z) * ny + y] = pz[z] * r.plan[x * ny + y];
          }
        }
      }
      out.distortion = PlanCost(out.plan, cost);
      return out;
    }
    std::vector<double> previous;
    for (int it = 0; it < 2000; ++it) {
      if (realism) {
        std::vector<double> log_ref(cost.size());
        for (int u = 0; u < nu; ++u) {
          const int z = u % nz;
          for (int y = 0; y < ny; ++y) {
            const double wy = w[z * ny + y];
            log_ref[u * ny + y] =
                (wy > 0.0 ? std::log(wy) : -kUnbounded) - lambda * cost[u * ny + y];
          }
        }
        SinkhornResult r = SinkhornProject(log_ref, pxz, px, InnerSinkhorn(), &g);
        g = r.g;
        out.plan = std::move(r.plan);
      } else {
        // Blahut-Arimoto step: p(y|x,z) proportional to w(y|z) exp(-lambda d).
        for (int u = 0; u < nu; ++u) {
          const int z = u % nz;
          double total = 0.0;
          for (int y = 0; y < ny; ++y) {
            const double e = w[z * ny + y] * std::exp(-lambda * cost[u * ny + y]);
            out.plan[u * ny + y] = e;
            total += e;
          }
          for (int y = 0; y < ny; ++y) {
            out.plan[u * ny + y] = total > 0.0 ? pxz[u] * out.plan[u * ny + y] / total
                                               : pxz[u] / ny;
          }
        }
      }
      // w(y|z) = pi(y|z).
      for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
          double s = 0.0;
          for (int x = 0; x < nx; ++x) s += out.plan[(x * nz + z) * ny + y];
          w[z * ny + y] = pz[z] > 0.0 ? s / pz[z] : 1.0 / ny;
        }
      }
      if (!previous.empty()) {
        double change = 0.0;
        for (std::size_t k = 0; k < previous.size(); ++k) {
          change = std::max(change, std::fabs(previous[k] - out.plan[k]));
        }
        if (change < 1e-13) break;
      }
      previous = out.plan;
    }
    out.distortion = PlanCost(out.plan, cost);
    return out;
  };
  InnerSolution sol;
  if (!LambdaSearch(solve, delta, &sol)) {
    Fail(ErrorCode::kNumerical, "distortion multiplier search did not bracket delta");
  }
  ConditionalMiResult out;
  out.channel.assign(sol.plan.size(), 0.0);
  for (int u = 0; u < nu; ++u) {
    double total = 0.0;
    for (int y = 0; y < ny; ++y) total += sol.plan[u * ny + y];
    for (int y = 0; y < ny; ++y) {
      out.channel[u * ny + y] = total > 0.0 ? sol.plan[u * ny + y] / total : 1.0 / ny;
    }
  }
  if (realism && *realism == Realism::kMarginal) {
    out.channel = RealismSurgery(pxz, out.channel, px).kernel;
  } else if (realism) {
    for (int z = 0; z < nz; ++z) {
      if (pz[z] <= 0.0) continue;
      std::vector<double> cond(nx), block(static_cast<std::size_t>(nx) * ny);
      for (int x = 0; x < nx; ++x) {
        cond[x] = pxz[x * nz + z] / pz[z];
        for (int y = 0; y < ny; ++y) block[x * ny + y] = out.channel[(x * nz + z) * ny + y];
      }
      const auto fixed = RealismSurgery(cond, block, cond);
      for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
          out.channel[(x * nz + z) * ny + y] = fixed.kernel[x * ny + y];
        }
      }
    }
  }
  std::vector<double> joint(static_cast<std::size_t>(nu) * ny);
  for (int u = 0; u < nu; ++u) {
    for (int y = 0; y < ny; ++y) joint[u * ny + y] = pxz[u] * out.channel[u * ny + y];
  }
  long double mass = 0.0L;
  for (double v : joint) mass += v;
  for (double& v : joint) v = static_cast<double>(v / mass);
  const JointPmf j({{"x", nx}, {"z", nz}, {"y", ny}}, joint);
  out.value = ConditionalMutualInformation(j, {"x"}, {"y"}, {"z"});
  out.distortion = ExpectedDistortion(j.Marginal({"x", "y"}), d);
  return out;
}

RatePoint MinRateVEqualsY(const RegionQuery& q) {
  Require(!std::isfinite(q.r_c),
          "the V = Y route needs unbounded common randomness");
  Require(q.setting.side_info != SideInfo::kDecoder,
          "the V = Y route needs the encoder to see Z");
  const JointPmf source = SourceForSetting(q.p_xz, q.setting);
  const ConditionalMiResult res =
      MinConditionalMi(source, q.d, q.delta, q.setting.realism);
  const int nx = source.axes()[0].size, nz = source.axes()[1].size;
  const int ny = q.d.cols();
  std::vector<double> identity(static_cast<std::size_t>(nz) * ny * ny, 0.0);
  for (int z = 0; z < nz; ++z) {
    for (int v = 0; v < ny; ++v) identity[(z * ny + v) * ny + v] = 1.0;
  }
  const Candidate c = MakeCandidate(source, Kernel(nx * nz, ny, res.channel),
                                    Kernel(nz * ny, ny, identity));
  RatePoint out = EvaluateBoundsUnchecked(c, q.setting, q.d, q.r_c);
  out.restarts = 1;
  return out;
}

}  // namespace rdplab
