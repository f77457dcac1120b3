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

// Multi-start alternating optimization of the single-letter regions.
//
// The encoder p(v|x,z) (or p(v|x)) and the decoder channel p(y|z,v) are
// updated in turn by exponentiated-gradient steps on their simplices. The
// realism equality and the distortion inequality enter through an augmented
// Lagrangian whose penalty weight grows tenfold whenever the violation stalls;
// max(r, r_sum - r_c) is smoothed by a log-sum-exp whose temperature shrinks
// every outer round. A final exact realism surgery on the channel removes the
// residual violation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <thread>

#include "rdplab/error.h"
#include "rdplab/regions.h"
#include "rdplab/rng.h"
#include "rdplab/transport.h"
#include "region_internal.h"

namespace rdplab {
namespace {

using internal::Dims;
using internal::kInvLn2;
using internal::Log2Safe;

struct Problem {
  Dims dims;
  Setting setting;
  bool decoder_only = false;
  bool realism = true;
  double delta = 0.0;
  double r_c = kUnbounded;
  std::vector<double> pxz;     // nx * nz
  std::vector<double> d;       // nx * ny
  std::vector<double> target;  // realism target: p_X (ny) or p_{X,Z} as (z, y)
  internal::BoundTerms terms;
  std::vector<std::vector<int>> maps;  // per mask
  std::vector<int> map_sizes;

  int encoder_rows() const {
    return decoder_only ? dims.nx : dims.nx * dims.nz;
  }
  int realism_size() const {
    return setting.realism == Realism::kJoint ? dims.nz * dims.ny : dims.ny;
  }
  int realism_index(int z, int y) const {
    return setting.realism == Realism::kJoint ? z * dims.ny + y : y;
  }
};

Problem MakeProblem(const RegionQuery& q) {
  Problem p;
  const JointPmf source = SourceForSetting(q.p_xz, q.setting);
  p.setting = q.setting;
  p.decoder_only = q.setting.decoder_only();
  p.realism = q.optimizer.enforce_realism;
  p.delta = q.delta;
  p.r_c = q.r_c;
  p.dims = {source.axes()[0].size, source.axes()[1].size, DefaultVSize(q),
            q.d.cols()};
  Require(q.d.rows() == p.dims.nx,
          "distortion matrix rows must match the X alphabet");
  p.pxz.assign(source.data().begin(), source.data().end());
  p.d.assign(q.d.data().begin(), q.d.data().end());
  p.terms = internal::TermsFor(q.setting);
  p.maps.resize(16);
  p.map_sizes.resize(16);
  for (int mask = 1; mask < 16; ++mask) {
    p.maps[mask] = internal::MarginalIndex(p.dims, mask);
    p.map_sizes[mask] = internal::MaskSize(p.dims, mask);
  }
  if (p.realism) {
    p.target.assign(p.realism_size(), 0.0);
    for (int x = 0; x < p.dims.nx; ++x) {
      for (int z = 0; z < p.dims.nz; ++z) {
        p.target[p.realism_index(z, x)] += p.pxz[x * p.dims.nz + z];
      }
    }
  }
  return p;
}

struct Multipliers {
  std::vector<double> realism;
  double distortion = 0.0;
  double mu = 10.0;
  double temperature = 0.02;
};

struct Status {
  double r = 0.0, s = 0.0, distortion = 0.0;
  double realism_violation = 0.0;  // max abs
  double distortion_excess = 0.0;
  std::vector<double> residual;
};

// Adds coef * grad H(S) for every term into `grad` (if given) and returns the
// weighted entropy sum.
double TermsWithGradient(const Problem& p, const std::vector<double>& joint,
                         const internal::EntropyTerms& terms, double weight,
                         std::vector<double>* grad,
                         std::vector<double>& scratch) {
  double total = 0.0;
  for (const auto& [mask, coef] : terms) {
    const auto& map = p.maps[mask];
    scratch.assign(p.map_sizes[mask], 0.0);
    for (std::size_t k = 0; k < joint.size(); ++k) scratch[map[k]] += joint[k];
    double h = 0.0;
    for (double v : scratch) {
      if (v > 0.0) h -= v * std::log2(v);
    }
    total += coef * h;
    if (grad) {
      for (double& v : scratch) v = -(Log2Safe(v) + kInvLn2);
      const double c = coef * weight;
      for (std::size_t k = 0; k < joint.size(); ++k) {
        (*grad)[k] += c * scratch[map[k]];
      }
    }
  }
  return total;
}

// Augmented Lagrangian and (optionally) its gradient with respect to the
// joint tensor.
double Lagrangian(const Problem& p, const std::vector<double>& joint,
                  const Multipliers& mult, std::vector<double>* grad,
                  Status* status) {
  const Dims& dm = p.dims;
  std::vector<double> scratch;
  if (grad) grad->assign(joint.size(), 0.0);
  const bool sum_active = std::isfinite(p.r_c);
  // The smoothing weight depends on r and s, so evaluate values first.
  const double r = TermsWithGradient(p, joint, p.terms.r, 0.0, nullptr, scratch);
  const double s =
      sum_active ? TermsWithGradient(p, joint, p.terms.s, 0.0, nullptr, scratch)
                 : 0.0;
  double objective = r;
  double weight_r = 1.0;
  if (sum_active) {
    const double a = r / mult.temperature;
    const double b = (s - p.r_c) / mult.temperature;
    const double hi = std::max(a, b);
    const double ea = std::exp(a - hi), eb = std::exp(b - hi);
    objective = mult.temperature * (hi + std::log(ea + eb));
    weight_r = ea / (ea + eb);
  }
  if (grad) {
    TermsWithGradient(p, joint, p.terms.r, weight_r, grad, scratch);
    if (sum_active && weight_r < 1.0) {
      TermsWithGradient(p, joint, p.terms.s, 1.0 - weight_r, grad, scratch);
    }
  }
  double L = objective;
  // Distortion.
  double dist = 0.0;
  for (int x = 0; x < dm.nx; ++x) {
    for (int z = 0; z < dm.nz; ++z) {
      for (int v = 0; v < dm.nv; ++v) {
        for (int y = 0; y < dm.ny; ++y) {
          dist += joint[dm.index(x, z, v, y)] * p.d[x * dm.ny + y];
        }
      }
    }
  }
  const double c = dist - p.delta;
  const double shifted = std::max(0.0, mult.distortion + mult.mu * c);
  L += (shifted * shifted - mult.distortion * mult.distortion) / (2.0 * mult.mu);
  // Realism.
  std::vector<double> residual;
  if (p.realism) {
    residual.assign(p.realism_size(), 0.0);
    for (int x = 0; x < dm.nx; ++x) {
      for (int z = 0; z < dm.nz; ++z) {
        for (int v = 0; v < dm.nv; ++v) {
          for (int y = 0; y < dm.ny; ++y) {
            residual[p.realism_index(z, y)] += joint[dm.index(x, z, v, y)];
          }
        }
      }
    }
    for (std::size_t k = 0; k < residual.size(); ++k) {
      residual[k] -= p.target[k];
      L += mult.realism[k] * residual[k] +
           0.5 * mult.mu * residual[k] * residual[k];
    }
  }
  if (grad) {
    for (int x = 0; x < dm.nx; ++x) {
      for (int z = 0; z < dm.nz; ++z) {
        for (int v = 0; v < dm.nv; ++v) {
          for (int y = 0; y < dm.ny; ++y) {
            double g = shifted * p.d[x * dm.ny + y];
            if (p.realism) {
              const int k = p.realism_index(z, y);
              g += mult.realism[k] + mult.mu * residual[k];
            }
            (*grad)[dm.index(x, z, v, y)] += g;
          }
        }
      }
    }
  }
  if (status) {
    status->r = r;
    status->s = sum_active
                    ? s
                    : TermsWithGradient(p, joint, p.terms.s, 0.0, nullptr, scratch);
    status->distortion = dist;
    status->distortion_excess = std::max(0.0, c);
    status->realism_violation = 0.0;
    for (double v : residual) {
      status->realism_violation = std::max(status->realism_violation, std::fabs(v));
    }
    status->residual = std::move(residual);
  }
  return L;
}

struct State {
  std::vector<double> encoder;  // encoder_rows x nv
  std::vector<double> channel;  // (nz*nv) x ny
};

std::vector<double> JointOf(const Problem& p, const State& st) {
  return internal::BuildJoint(p.dims, p.pxz, st.encoder, st.channel,
                              p.decoder_only);
}

void DirichletRow(CounterRng& rng, double* row, int n) {
  double total = 0.0;
  for (int k = 0; k < n; ++k) total += row[k] = -std::log(rng.Uniform());
  for (int k = 0; k < n; ++k) row[k] /= total;
}

State InitialState(const Problem& p, int restart, CounterRng& rng) {
  const Dims& dm = p.dims;
  State st;
  st.encoder.assign(static_cast<std::size_t>(p.encoder_rows()) * dm.nv, 0.0);
  st.channel.assign(static_cast<std::size_t>(dm.nz) * dm.nv * dm.ny, 0.0);
  if (restart == 0) {
    // Near-identity start: V ~ X, Y ~ V.
    for (int row = 0; row < p.encoder_rows(); ++row) {
      const int x = p.decoder_only ? row : row / dm.nz;
      for (int v = 0; v < dm.nv; ++v) {
        st.encoder[row * dm.nv + v] =
            (v == x % dm.nv ? 0.9 : 0.0) + 0.1 / dm.nv;
      }
    }
    for (int zv = 0; zv < dm.nz * dm.nv; ++zv) {
      const int v = zv % dm.nv;
      for (int y = 0; y < dm.ny; ++y) {
        st.channel[zv * dm.ny + y] = (y == v % dm.ny ? 0.9 : 0.0) + 0.1 / dm.ny;
      }
    }
    return st;
  }
  // Odd restarts start near a random deterministic encoder and channel,
  // even ones at a Dirichlet draw.
  const bool near_vertex = restart % 2 == 1;
  auto init = [&](double* row, int n) {
    DirichletRow(rng, row, n);
    if (!near_vertex) return;
    const int hot = static_cast<int>(rng.Below(n));
    for (int k = 0; k < n; ++k) row[k] = 0.2 * row[k] + (k == hot ? 0.8 : 0.0);
  };
  for (int row = 0; row < p.encoder_rows(); ++row) {
    init(&st.encoder[row * dm.nv], dm.nv);
  }
  for (int zv = 0; zv < dm.nz * dm.nv; ++zv) {
    init(&st.channel[zv * dm.ny], dm.ny);
  }
  return st;
}

constexpr double kRowFloor = 1e-12;

// Mixes every row with the uniform row by `weight`.
void MixUniform(std::vector<double>& rows, int row_len, double weight) {
  for (double& v : rows) v = (1.0 - weight) * v + weight / row_len;
}

// One exponentiated-gradient step on a block of simplex rows with
// backtracking. Returns the new Lagrangian value.
double BlockStep(std::vector<double>& rows, int row_len,
                 const std::vector<double>& grad,
                 const std::vector<double>& row_weight, double& eta,
                 double current,
                 const std::function<double(const std::vector<double>&)>& eval) {
  const int n_rows = static_cast<int>(rows.size()) / row_len;
  std::vector<double> trial(rows.size());
  for (int attempt = 0; attempt < 30; ++attempt) {
    for (int r = 0; r < n_rows; ++r) {
      const double w = std::max(row_weight[r], 1e-9);
      double gmin = grad[r * row_len];
      for (int k = 1; k < row_len; ++k) gmin = std::min(gmin, grad[r * row_len + k]);
      double total = 0.0;
      for (int k = 0; k < row_len; ++k) {
        const double step = std::min(eta * (grad[r * row_len + k] - gmin) / w, 700.0);
        trial[r * row_len + k] = rows[r * row_len + k] * std::exp(-step);
        total += trial[r * row_len + k];
      }
      // A floor keeps every direction reachable by the multiplicative
      // update; vertices would otherwise be absorbing.
      double floored = 0.0;
      for (int k = 0; k < row_len; ++k) {
        floored += trial[r * row_len + k] =
            std::max(trial[r * row_len + k] / total, kRowFloor);
      }
      for (int k = 0; k < row_len; ++k) trial[r * row_len + k] /= floored;
    }
    const double value = eval(trial);
    if (value <= current) {
      rows.swap(trial);
      eta = std::min(eta * 1.5, 1e6);
      return value;
    }
    eta *= 0.3;
  }
  return current;
}

struct RestartResult {
  RatePoint point;
  double excess = kUnbounded;
};

void RepairDistortion(const Problem& p, double delta, State& st);

RestartResult RunRestart(const Problem& p, const RegionQuery& q, int restart) {
  const Dims& dm = p.dims;
  CounterRng rng(q.optimizer.seed + static_cast<std::uint64_t>(restart), 0x5eed);
  State st = InitialState(p, restart, rng);
  Multipliers mult;
  mult.realism.assign(p.realism ? p.realism_size() : 0, 0.0);
  double eta_e = 0.5, eta_c = 0.5;
  double last_violation = kUnbounded;
  std::vector<double> grad;
  for (int round = 0; round < q.optimizer.outer_rounds; ++round) {
    if (round > 0) {
      // Fresh step sizes for the new penalty, and a small push off the
      // boundary of the simplices.
      eta_e = eta_c = 0.5;
      MixUniform(st.encoder, dm.nv, 1e-3 / round);
      MixUniform(st.channel, dm.ny, 1e-3 / round);
    }
    double current = Lagrangian(p, JointOf(p, st), mult, nullptr, nullptr);
    for (int it = 0; it < q.optimizer.inner_iterations; ++it) {
      const double before = current;
      // Encoder block.
      {
        const std::vector<double> joint = JointOf(p, st);
        Lagrangian(p, joint, mult, &grad, nullptr);
        std::vector<double> g(st.encoder.size(), 0.0), w(p.encoder_rows(), 0.0);
        for (int x = 0; x < dm.nx; ++x) {
          for (int z = 0; z < dm.nz; ++z) {
            const double pw = p.pxz[x * dm.nz + z];
            const int row = p.decoder_only ? x : x * dm.nz + z;
            w[row] += pw;
            for (int v = 0; v < dm.nv; ++v) {
              const double* ch = &st.channel[(z * dm.nv + v) * dm.ny];
              double acc = 0.0;
              for (int y = 0; y < dm.ny; ++y) acc += ch[y] * grad[dm.index(x, z, v, y)];
              g[row * dm.nv + v] += pw * acc;
            }
          }
        }
        current = BlockStep(st.encoder, dm.nv, g, w, eta_e, current,
                            [&](const std::vector<double>& enc) {
                              return Lagrangian(
                                  p,
                                  internal::BuildJoint(dm, p.pxz, enc, st.channel,
                                                       p.decoder_only),
                                  mult, nullptr, nullptr);
                            });
      }
      // Channel block.
      {
        const std::vector<double> joint = JointOf(p, st);
        Lagrangian(p, joint, mult, &grad, nullptr);
        std::vector<double> g(st.channel.size(), 0.0), w(dm.nz * dm.nv, 0.0);
        for (int x = 0; x < dm.nx; ++x) {
          for (int z = 0; z < dm.nz; ++z) {
            const double pw = p.pxz[x * dm.nz + z];
            const double* enc =
                &st.encoder[(p.decoder_only ? x : x * dm.nz + z) * dm.nv];
            for (int v = 0; v < dm.nv; ++v) {
              const double pv = pw * enc[v];
              w[z * dm.nv + v] += pv;
              for (int y = 0; y < dm.ny; ++y) {
                g[(z * dm.nv + v) * dm.ny + y] += pv * grad[dm.index(x, z, v, y)];
              }
            }
          }
        }
        current = BlockStep(st.channel, dm.ny, g, w, eta_c, current,
                            [&](const std::vector<double>& ch) {
                              return Lagrangian(
                                  p,
                                  internal::BuildJoint(dm, p.pxz, st.encoder, ch,
                                                       p.decoder_only),
                                  mult, nullptr, nullptr);
                            });
      }
      if (std::fabs(before - current) <= 1e-13 * (1.0 + std::fabs(current)) &&
          it > 10) {
        break;
      }
    }
    Status status;
    Lagrangian(p, JointOf(p, st), mult, nullptr, &status);
    for (std::size_t k = 0; k < mult.realism.size(); ++k) {
      mult.realism[k] += mult.mu * status.residual[k];
    }
    mult.distortion = std::max(
        0.0, mult.distortion + mult.mu * (status.distortion - p.delta));
    const double violation =
        std::max(status.realism_violation, status.distortion_excess);
    if (violation > 0.25 * last_violation) mult.mu = std::min(mult.mu * 10.0, 1e9);
    last_violation = violation;
    mult.temperature = std::max(1e-6, mult.temperature * 0.35);
    if (round >= 6 && violation < 0.1 * q.optimizer.tolerance &&
        mult.temperature <= 1e-5) {
      break;
    }
  }
  // Exact realism on the channel.
  if (p.realism) {
    std::vector<double> pw(dm.nz * dm.nv, 0.0);
    for (int x = 0; x < dm.nx; ++x) {
      for (int z = 0; z < dm.nz; ++z) {
        const double* enc =
            &st.encoder[(p.decoder_only ? x : x * dm.nz + z) * dm.nv];
        for (int v = 0; v < dm.nv; ++v) {
          pw[z * dm.nv + v] += p.pxz[x * dm.nz + z] * enc[v];
        }
      }
    }
    if (p.setting.realism == Realism::kMarginal) {
      st.channel = RealismSurgery(pw, st.channel, p.target).kernel;
    } else {
      for (int z = 0; z < dm.nz; ++z) {
        double pz = 0.0;
        for (int v = 0; v < dm.nv; ++v) pz += pw[z * dm.nv + v];
        if (pz <= 0.0) continue;
        std::vector<double> cond(dm.nv), target(dm.ny);
        for (int v = 0; v < dm.nv; ++v) cond[v] = pw[z * dm.nv + v] / pz;
        for (int y = 0; y < dm.ny; ++y) target[y] = p.target[z * dm.ny + y] / pz;
        std::span<double> block(&st.channel[z * dm.nv * dm.ny], dm.nv * dm.ny);
        const auto fixed = RealismSurgery(cond, block, target);
        std::copy(fixed.kernel.begin(), fixed.kernel.end(), block.begin());
      }
    }
  }
  // Renormalize rows against accumulated round-off before validation.
  auto renormalize = [](std::vector<double>& rows, int len) {
    for (std::size_t r = 0; r < rows.size(); r += len) {
      long double total = 0.0L;
      for (int k = 0; k < len; ++k) total += rows[r + k];
      for (int k = 0; k < len; ++k) rows[r + k] = static_cast<double>(rows[r + k] / total);
    }
  };
  renormalize(st.encoder, dm.nv);
  renormalize(st.channel, dm.ny);
  RepairDistortion(p, q.delta, st);
  std::vector<double> joint = JointOf(p, st);
  long double mass = 0.0L;
  for (double v : joint) mass += v;
  for (double& v : joint) v = static_cast<double>(v / mass);
  Candidate c{JointPmf({{"x", dm.nx}, {"z", dm.nz}, {"v", dm.nv}, {"y", dm.ny}},
                       std::move(joint))};
  RestartResult out;
  out.point = EvaluateBoundsUnchecked(c, p.setting, q.d, p.r_c);
  out.excess = std::max(0.0, out.point.delta - q.delta);
  bool ok = out.excess <= 1e-6;
  if (ok && p.realism) {
    ok = CheckFeasible(c, p.setting, SourceForSetting(q.p_xz, p.setting)).empty();
  }
  out.point.converged = ok;
  return out;
}

// Least-distortion channel meeting the realism constraint for a fixed
// encoder (an exact transport problem per realism block).
struct LeastDistortion {
  std::vector<double> channel;
  double floor = 0.0;    // distortion of `channel`
  double current = 0.0;  // distortion of the state's own channel
};

LeastDistortion SolveLeastDistortion(const Problem& p,
                                     const std::vector<double>& encoder,
                                     const std::vector<double>& channel) {
  const Dims& dm = p.dims;
  const int nw = dm.nz * dm.nv;
  std::vector<double> pw(nw, 0.0);
  std::vector<double> cost(static_cast<std::size_t>(nw) * dm.ny, 0.0);
  for (int x = 0; x < dm.nx; ++x) {
    for (int z = 0; z < dm.nz; ++z) {
      const double* enc =
          &encoder[(p.decoder_only ? x : x * dm.nz + z) * dm.nv];
      for (int v = 0; v < dm.nv; ++v) {
        const double m = p.pxz[x * dm.nz + z] * enc[v];
        pw[z * dm.nv + v] += m;
        for (int y = 0; y < dm.ny; ++y) {
          cost[(z * dm.nv + v) * dm.ny + y] += m * p.d[x * dm.ny + y];
        }
      }
    }
  }
  LeastDistortion out;
  for (std::size_t k = 0; k < cost.size(); ++k) {
    out.current += cost[k] * channel[k];
  }
  out.channel = channel;
  for (int w = 0; w < nw; ++w) {
    for (int y = 0; y < dm.ny; ++y) {
      double& c = cost[w * dm.ny + y];
      c = pw[w] > 0.0 ? c / pw[w] : 0.0;
    }
  }
  auto solve_block = [&](int w0, int count, std::span<const double> b) {
    std::vector<double> a(pw.begin() + w0, pw.begin() + w0 + count);
    double mass_a = 0.0, mass_b = 0.0;
    for (double v : a) mass_a += v;
    for (double v : b) mass_b += v;
    if (mass_a <= 0.0) return;
    std::vector<double> bb(b.begin(), b.end());
    for (double& v : bb) v *= mass_a / mass_b;
    const std::span<const double> c(&cost[static_cast<std::size_t>(w0) * dm.ny],
                                    static_cast<std::size_t>(count) * dm.ny);
    const TransportPlan plan = MinCostTransport(a, bb, c);
    for (int w = 0; w < count; ++w) {
      if (a[w] <= 0.0) continue;
      for (int y = 0; y < dm.ny; ++y) {
        out.channel[(w0 + w) * dm.ny + y] = plan.plan[w * dm.ny + y] / a[w];
      }
    }
  };
  if (!p.realism) {
    for (int w = 0; w < nw; ++w) {
      const double* c = &cost[w * dm.ny];
      const int arg = static_cast<int>(std::min_element(c, c + dm.ny) - c);
      for (int y = 0; y < dm.ny; ++y) {
        out.channel[w * dm.ny + y] = y == arg ? 1.0 : 0.0;
      }
    }
  } else if (p.setting.realism == Realism::kMarginal) {
    solve_block(0, nw, p.target);
  } else {
    for (int z = 0; z < dm.nz; ++z) {
      solve_block(z * dm.nv, dm.nv,
                  std::span<const double>(p.target).subspan(z * dm.ny, dm.ny));
    }
  }
  for (int w = 0; w < nw; ++w) {
    for (int y = 0; y < dm.ny; ++y) {
      out.floor += pw[w] * cost[w * dm.ny + y] * out.channel[w * dm.ny + y];
    }
  }
  return out;
}

// Pulls the expected distortion down to `delta` without breaking realism.
// First the channel is mixed with the least-distortion channel for the same
// encoder; if that is not enough, the encoder is moved along the segment
// towards V = X (whose least-distortion channel reaches the floor) by the
// smallest step that restores the budget.
void RepairDistortion(const Problem& p, double delta, State& st) {
  const Dims& dm = p.dims;
  const LeastDistortion base = SolveLeastDistortion(p, st.encoder, st.channel);
  if (base.current <= delta) return;
  if (base.floor < delta) {
    const double lambda = std::min(
        1.0, (base.current - delta) / (base.current - base.floor) *
                     (1.0 + 1e-9) + 1e-15);
    for (std::size_t k = 0; k < st.channel.size(); ++k) {
      st.channel[k] = (1.0 - lambda) * st.channel[k] + lambda * base.channel[k];
    }
    return;
  }
  if (dm.nv < dm.nx) return;
  std::vector<double> target_enc(st.encoder.size(), 0.0);
  for (int row = 0; row < p.encoder_rows(); ++row) {
    const int x = p.decoder_only ? row : row / dm.nz;
    target_enc[row * dm.nv + x] = 1.0;
  }
  auto encoder_at = [&](double lambda) {
    std::vector<double> enc(st.encoder.size());
    for (std::size_t k = 0; k < enc.size(); ++k) {
      enc[k] = (1.0 - lambda) * st.encoder[k] + lambda * target_enc[k];
    }
    return enc;
  };
  LeastDistortion hi_sol =
      SolveLeastDistortion(p, target_enc, st.channel);
  if (hi_sol.floor > delta) return;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    LeastDistortion sol = SolveLeastDistortion(p, encoder_at(mid), st.channel);
    if (sol.floor <= delta) {
      hi = mid;
      hi_sol = std::move(sol);
    } else {
      lo = mid;
    }
  }
  st.encoder = encoder_at(hi);
  st.channel = std::move(hi_sol.channel);
}

bool LexLess(const RatePoint& a, const RatePoint& b) {
  const auto da = a.candidate->joint.data();
  const auto db = b.candidate->joint.data();
  return std::lexicographical_compare(da.begin(), da.end(), db.begin(), db.end());
}

// Smallest distortion attainable under the realism constraint alone.
double MinRealismDistortion(const Problem& p) {
  const Dims& dm = p.dims;
  if (!p.realism) {
    double total = 0.0;
    for (int x = 0; x < dm.nx; ++x) {
      double px = 0.0, best = kUnbounded;
      for (int z = 0; z < dm.nz; ++z) px += p.pxz[x * dm.nz + z];
      for (int y = 0; y < dm.ny; ++y) best = std::min(best, p.d[x * dm.ny + y]);
      total += px * best;
    }
    return total;
  }
  if (p.setting.realism == Realism::kMarginal) {
    std::vector<double> px(dm.nx, 0.0);
    for (int x = 0; x < dm.nx; ++x) {
      for (int z = 0; z < dm.nz; ++z) px[x] += p.pxz[x * dm.nz + z];
    }
    return MinCostTransport(px, px, p.d).cost;
  }
  double total = 0.0;
  for (int z = 0; z < dm.nz; ++z) {
    std::vector<double> col(dm.nx);
    for (int x = 0; x < dm.nx; ++x) col[x] = p.pxz[x * dm.nz + z];
    total += MinCostTransport(col, col, p.d).cost;
  }
  return total;
}

}  // namespace

RatePoint MinRate(const RegionQuery& q) {
  Require(q.delta >= 0.0, "delta must be nonnegative");
  Require(q.r_c >= 0.0, "r_c must be nonnegative");
  Require(q.optimizer.restarts >= 1, "at least one restart is required");
  Problem p = MakeProblem(q);
  if (p.realism && q.d.cols() != q.d.rows()) {
    Fail(ErrorCode::kInfeasible, "realism needs a square distortion matrix");
  }
  const double floor = MinRealismDistortion(p);
  if (floor > q.delta + 1e-12) {
    Fail(ErrorCode::kInfeasible,
         "delta " + FormatReal(q.delta) +
             " is below the smallest distortion compatible with the constraints (" +
             FormatReal(floor) + ")");
  }
  // Aim slightly inside the distortion budget so that the residual
  // penalty violation does not push the final candidate above delta.
  constexpr double kDistortionMargin = 1e-6;
  if (q.delta - floor > 2.0 * kDistortionMargin) {
    p.delta = q.delta - kDistortionMargin;
  }
  const int restarts = q.optimizer.restarts;
  std::vector<RestartResult> results(restarts);
  int threads = q.optimizer.threads > 0
                    ? q.optimizer.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, restarts);
  std::atomic<int> next{0};
  std::vector<std::future<void>> workers;
  for (int t = 0; t < threads; ++t) {
    workers.push_back(std::async(std::launch::async, [&] {
      for (int k = next++; k < restarts; k = next++) {
        results[k] = RunRestart(p, q, k);
      }
    }));
  }
  for (auto& w : workers) w.get();

  int best = -1;
  for (int k = 0; k < restarts; ++k) {
    const RatePoint& cand = results[k].point;
    if (best < 0) {
      best = k;
      continue;
    }
    const RatePoint& inc = results[best].point;
    if (cand.converged != inc.converged) {
      if (cand.converged) best = k;
      continue;
    }
    if (!cand.converged) {
      if (results[k].excess < results[best].excess) best = k;
      continue;
    }
    if (cand.rate < inc.rate - 1e-12 ||
        (std::fabs(cand.rate - inc.rate) <= 1e-12 && LexLess(cand, inc))) {
      best = k;
    }
  }
  RatePoint out = results[best].point;
  out.restarts = restarts;
  if (out.boundary_kind == "inner-bound" &&
      FindCommonComponent(q.p_xz).hypothesis_holds) {
    out.boundary_kind = "boundary";
  }
  return out;
}

double ClassicalBaseline(const JointPmf& p_xz, const DistortionMatrix& d,
                         double delta, BaselineMode mode,
                         const OptimizerConfig& config) {
  if (mode == BaselineMode::kConditionalRd) {
    return MinConditionalMi(p_xz, d, delta, std::nullopt).value;
  }
  RegionQuery q{p_xz, d, Setting{SideInfo::kDecoder, Realism::kMarginal}, delta,
                kUnbounded, 0, config};
  q.optimizer.enforce_realism = false;
  return MinRate(q).rate;
}

}  // namespace rdplab
