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

#include "rdplab/regions.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rdplab/error.h"
#include "region_internal.h"

namespace rdplab {
namespace internal {

BoundTerms TermsFor(const Setting& setting) {
  const EntropyTerms conditional_r = {
      {kX | kZ, 1.0}, {kV | kZ, 1.0}, {kX | kV | kZ, -1.0}, {kZ, -1.0}};
  const EntropyTerms joint_s = {
      {kY | kZ, 1.0}, {kV | kZ, 1.0}, {kY | kV | kZ, -1.0}, {kZ, -1.0}};
  switch (setting.side_info) {
    case SideInfo::kBoth:
    case SideInfo::kNone:
      if (setting.realism == Realism::kJoint) return {conditional_r, joint_s};
      // I(Y;V|Z) - H(Z|Y) = H(Y) + H(V,Z) - H(Y,V,Z) - H(Z).
      return {conditional_r,
              {{kY, 1.0}, {kV | kZ, 1.0}, {kY | kV | kZ, -1.0}, {kZ, -1.0}}};
    case SideInfo::kDecoder:
      if (setting.realism == Realism::kJoint) return {conditional_r, joint_s};
      return {{{kX, 1.0}, {kX | kV, -1.0}, {kZ, -1.0}, {kZ | kV, 1.0}},
              {{kY, 1.0}, {kY | kV, -1.0}, {kZ, -1.0}, {kZ | kV, 1.0}}};
  }
  return {};
}

std::vector<double> BuildJoint(const Dims& dims, const std::vector<double>& pxz,
                               const std::vector<double>& encoder,
                               const std::vector<double>& channel,
                               bool decoder_only) {
  std::vector<double> joint(dims.size());
  for (int x = 0; x < dims.nx; ++x) {
    for (int z = 0; z < dims.nz; ++z) {
      const double pw = pxz[x * dims.nz + z];
      const double* enc =
          &encoder[(decoder_only ? x : x * dims.nz + z) * dims.nv];
      for (int v = 0; v < dims.nv; ++v) {
        const double pv = pw * enc[v];
        const double* ch = &channel[(z * dims.nv + v) * dims.ny];
        for (int y = 0; y < dims.ny; ++y) {
          joint[dims.index(x, z, v, y)] = pv * ch[y];
        }
      }
    }
  }
  return joint;
}

int MaskSize(const Dims& dims, int mask) {
  int size = 1;
  if (mask & kX) size *= dims.nx;
  if (mask & kZ) size *= dims.nz;
  if (mask & kV) size *= dims.nv;
  if (mask & kY) size *= dims.ny;
  return size;
}

std::vector<int> MarginalIndex(const Dims& dims, int mask) {
  std::vector<int> out(dims.size());
  int flat = 0;
  for (int x = 0; x < dims.nx; ++x) {
    for (int z = 0; z < dims.nz; ++z) {
      for (int v = 0; v < dims.nv; ++v) {
        for (int y = 0; y < dims.ny; ++y) {
          int k = 0;
          if (mask & kX) k = k * dims.nx + x;
          if (mask & kZ) k = k * dims.nz + z;
          if (mask & kV) k = k * dims.nv + v;
          if (mask & kY) k = k * dims.ny + y;
          out[flat++] = k;
        }
      }
    }
  }
  return out;
}

double TermsValue(const Dims& dims, const std::vector<double>& joint,
                  const EntropyTerms& terms) {
  double total = 0.0;
  for (const auto& [mask, coef] : terms) {
    if (mask == 0) continue;
    const std::vector<int> map = MarginalIndex(dims, mask);
    std::vector<double> m(MaskSize(dims, mask), 0.0);
    for (int k = 0; k < dims.size(); ++k) m[map[k]] += joint[k];
    double h = 0.0;
    for (double p : m) {
      if (p > 0.0) h -= p * std::log2(p);
    }
    total += coef * h;
  }
  return total;
}

}  // namespace internal

namespace {

using internal::Dims;

Dims DimsOf(const Candidate& c) {
  return {c.x_size(), c.z_size(), c.v_size(), c.y_size()};
}

double MaxAbsDiff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

std::string Describe(const char* what, double value) {
  std::ostringstream out;
  out << what << " (" << value << ")";
  return out.str();
}

}  // namespace

Setting Setting::Parse(std::string_view name) {
  if (name == "ed-marginal") return {SideInfo::kBoth, Realism::kMarginal};
  if (name == "ed-joint") return {SideInfo::kBoth, Realism::kJoint};
  if (name == "d-marginal") return {SideInfo::kDecoder, Realism::kMarginal};
  if (name == "d-joint") return {SideInfo::kDecoder, Realism::kJoint};
  if (name == "none-marginal" || name == "none") {
    return {SideInfo::kNone, Realism::kMarginal};
  }
  if (name == "none-joint") {
    Fail(ErrorCode::kInvalidArgument,
         "joint realism needs side information; none-joint is ill-formed");
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown setting '" + std::string(name) + "'");
}

std::string Setting::Name() const {
  const char* side = side_info == SideInfo::kBoth      ? "ed"
                     : side_info == SideInfo::kDecoder ? "d"
                                                       : "none";
  return std::string(side) +
         (realism == Realism::kJoint ? "-joint" : "-marginal");
}

JointPmf SourceForSetting(const JointPmf& p_xz, const Setting& setting) {
  Require(p_xz.rank() == 2, "p_xz must have exactly two axes (x, z)");
  if (setting.side_info != SideInfo::kNone) {
    return p_xz.Renamed({"x", "z"});
  }
  const JointPmf px = p_xz.Marginal({p_xz.axes()[0].name});
  return JointPmf({{"x", px.axes()[0].size}, {"z", 1}},
                  std::vector<double>(px.data().begin(), px.data().end()));
}

Candidate CandidateFromJoint(JointPmf joint) {
  Require(joint.rank() == 4, "a candidate has exactly four axes");
  return Candidate{joint.Renamed({"x", "z", "v", "y"})};
}

Candidate MakeCandidate(const JointPmf& p_xz, const Kernel& encoder,
                        const Kernel& channel) {
  Require(p_xz.rank() == 2, "p_xz must have two axes");
  const Dims dims{p_xz.axes()[0].size, p_xz.axes()[1].size,
                  encoder.output_size(), channel.output_size()};
  Require(encoder.input_size() == dims.nx * dims.nz,
          "encoder needs |X|*|Z| rows");
  Require(channel.input_size() == dims.nz * dims.nv,
          "channel needs |Z|*|V| rows");
  std::vector<double> pxz(p_xz.data().begin(), p_xz.data().end());
  std::vector<double> enc(encoder.data().begin(), encoder.data().end());
  std::vector<double> ch(channel.data().begin(), channel.data().end());
  return Candidate{JointPmf(
      {{"x", dims.nx}, {"z", dims.nz}, {"v", dims.nv}, {"y", dims.ny}},
      internal::BuildJoint(dims, pxz, enc, ch, false))};
}

Candidate MakeDecoderOnlyCandidate(const JointPmf& p_xz, const Kernel& encoder,
                                   const Kernel& channel) {
  Require(p_xz.rank() == 2, "p_xz must have two axes");
  const Dims dims{p_xz.axes()[0].size, p_xz.axes()[1].size,
                  encoder.output_size(), channel.output_size()};
  Require(encoder.input_size() == dims.nx, "encoder needs |X| rows");
  Require(channel.input_size() == dims.nz * dims.nv,
          "channel needs |Z|*|V| rows");
  std::vector<double> pxz(p_xz.data().begin(), p_xz.data().end());
  std::vector<double> enc(encoder.data().begin(), encoder.data().end());
  std::vector<double> ch(channel.data().begin(), channel.data().end());
  return Candidate{JointPmf(
      {{"x", dims.nx}, {"z", dims.nz}, {"v", dims.nv}, {"y", dims.ny}},
      internal::BuildJoint(dims, pxz, enc, ch, true))};
}

std::vector<std::string> CheckFeasible(const Candidate& c, const Setting& s,
                                       const JointPmf& p_xz,
                                       double tolerance) {
  const JointPmf source = SourceForSetting(p_xz, s);
  Require(c.joint.rank() == 4, "candidate must have axes (x, z, v, y)");
  Require(c.x_size() == source.axes()[0].size &&
              c.z_size() == source.axes()[1].size,
          "candidate shape does not match p_xz");
  std::vector<std::string> out;
  const JointPmf xz = c.joint.Marginal({"x", "z"});
  const double marginal_gap = MaxAbsDiff(xz.data(), source.data());
  if (marginal_gap > tolerance) {
    out.push_back(Describe("(X,Z) marginal differs from p_xz", marginal_gap));
  }
  if (c.y_size() != c.x_size()) {
    out.push_back("realism needs |Y| = |X|");
  } else if (s.realism == Realism::kMarginal) {
    const double gap = MaxAbsDiff(c.joint.Marginal({"y"}).data(),
                                  c.joint.Marginal({"x"}).data());
    if (gap > tolerance) out.push_back(Describe("p_Y differs from p_X", gap));
  } else {
    const double gap = MaxAbsDiff(c.joint.Marginal({"y", "z"}).data(),
                                  c.joint.Marginal({"x", "z"}).data());
    if (gap > tolerance) {
      out.push_back(Describe("p_{Y,Z} differs from p_{X,Z}", gap));
    }
  }
  const double markov =
      ConditionalMutualInformation(c.joint, {"x"}, {"y"}, {"z", "v"});
  if (markov > tolerance) {
    out.push_back(Describe("X - (Z,V) - Y violated: I(X;Y|Z,V)", markov));
  }
  if (s.decoder_only()) {
    const double zxv = ConditionalMutualInformation(c.joint, {"z"}, {"v"}, {"x"});
    if (zxv > tolerance) {
      out.push_back(Describe("Z - X - V violated: I(Z;V|X)", zxv));
    }
  }
  if (s.side_info == SideInfo::kNone && c.z_size() != 1) {
    out.push_back("no-side-information candidates need a trivial Z axis");
  }
  return out;
}

RatePoint EvaluateBoundsUnchecked(const Candidate& c, const Setting& s,
                                  const DistortionMatrix& d, double r_c) {
  Require(r_c >= 0.0, "r_c must be nonnegative");
  const Dims dims = DimsOf(c);
  Require(d.rows() == dims.nx && d.cols() == dims.ny,
          "distortion matrix does not match the candidate alphabets");
  const std::vector<double> joint(c.joint.data().begin(), c.joint.data().end());
  const internal::BoundTerms terms = internal::TermsFor(s);
  RatePoint p;
  p.r = internal::TermsValue(dims, joint, terms.r);
  p.r_sum = internal::TermsValue(dims, joint, terms.s);
  p.delta = ExpectedDistortion(c.joint.Marginal({"x", "y"}), d);
  p.r_c = r_c;
  p.sum_active = std::isfinite(r_c);
  p.rate = std::max(0.0, p.r);
  if (p.sum_active) p.rate = std::max(p.rate, p.r_sum - r_c);
  p.setting = s.Name();
  p.v_size = dims.nv;
  p.restarts = 0;
  p.boundary_kind =
      s.side_info == SideInfo::kDecoder && s.realism == Realism::kMarginal &&
              p.sum_active
          ? "inner-bound"
          : "boundary";
  p.candidate = c;
  return p;
}

RatePoint EvaluateBounds(const Candidate& c, const Setting& s,
                         const DistortionMatrix& d, double r_c) {
  JointPmf source = c.joint.Marginal({"x", "z"});
  const auto violations = CheckFeasible(c, s, source);
  if (!violations.empty()) {
    std::string msg = "candidate infeasible for " + s.Name() + ":";
    for (const auto& v : violations) msg += " " + v + ";";
    Fail(ErrorCode::kInfeasible, msg);
  }
  return EvaluateBoundsUnchecked(c, s, d, r_c);
}

int DefaultVSize(const RegionQuery& q) {
  if (q.v_size > 0) return q.v_size;
  const int nz = q.setting.side_info == SideInfo::kNone ? 1 : q.p_xz.axes()[1].size;
  return q.p_xz.axes()[0].size * nz + 2;
}

CommonComponent FindCommonComponent(const JointPmf& p_xz) {
  Require(p_xz.rank() == 2, "p_xz must have two axes");
  const int nx = p_xz.axes()[0].size;
  const int nz = p_xz.axes()[1].size;
  std::vector<int> parent(nx + nz);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<bool> live(nx + nz, false);
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) {
      if (p_xz.data()[x * nz + z] <= 0.0) continue;
      live[x] = live[nx + z] = true;
      parent[find(x)] = find(nx + z);
    }
  }
  CommonComponent out;
  out.phi.assign(nx, -1);
  out.psi.assign(nz, -1);
  std::vector<int> label(nx + nz, -1);
  int next = 0;
  for (int node = 0; node < nx + nz; ++node) {
    if (!live[node]) continue;
    const int root = find(node);
    if (label[root] < 0) label[root] = next++;
    if (node < nx) {
      out.phi[node] = label[root];
    } else {
      out.psi[node - nx] = label[root];
    }
  }
  out.components = next;
  out.trivial = next <= 1;
  // I(X;Z|phi(X)) over the (x, z, k) joint.
  std::vector<double> xzk(static_cast<std::size_t>(nx) * nz * std::max(next, 1), 0.0);
  for (int x = 0; x < nx; ++x) {
    const int k = std::max(out.phi[x], 0);
    for (int z = 0; z < nz; ++z) {
      xzk[(static_cast<std::size_t>(x) * nz + z) * std::max(next, 1) + k] =
          p_xz.data()[x * nz + z];
    }
  }
  const JointPmf j({{"x", nx}, {"z", nz}, {"k", std::max(next, 1)}}, xzk);
  out.residual_cmi = ConditionalMutualInformation(j);
  out.hypothesis_holds = out.residual_cmi <= 1e-12;
  return out;
}

Candidate EmbedSideInfo(const Candidate& c) {
  const Dims dims = DimsOf(c);
  std::vector<double> out(static_cast<std::size_t>(dims.nx) * dims.nv * dims.nz * dims.ny);
  for (int x = 0; x < dims.nx; ++x) {
    for (int z = 0; z < dims.nz; ++z) {
      for (int v = 0; v < dims.nv; ++v) {
        for (int y = 0; y < dims.ny; ++y) {
          const int vz = v * dims.nz + z;
          out[(static_cast<std::size_t>(x) * dims.nv * dims.nz + vz) * dims.ny + y] =
              c.joint.data()[dims.index(x, z, v, y)];
        }
      }
    }
  }
  return Candidate{JointPmf({{"x", dims.nx}, {"z", 1},
                             {"v", dims.nv * dims.nz}, {"y", dims.ny}},
                            std::move(out))};
}

SurgeryResult RealismSurgery(std::span<const double> p_w,
                             std::span<const double> kernel,
                             std::span<const double> target) {
  const int nw = static_cast<int>(p_w.size());
  const int ny = static_cast<int>(target.size());
  Require(kernel.size() == p_w.size() * target.size(),
          "surgery kernel shape mismatch");
  SurgeryResult out;
  out.kernel.assign(kernel.begin(), kernel.end());
  std::vector<long double> law(ny, 0.0L);
  for (int w = 0; w < nw; ++w) {
    for (int y = 0; y < ny; ++y) law[y] += p_w[w] * kernel[w * ny + y];
  }
  double max_dev = 0.0;
  long double excess = 0.0L, deficit = 0.0L;
  for (int y = 0; y < ny; ++y) {
    const long double diff = law[y] - target[y];
    max_dev = std::max(max_dev, static_cast<double>(std::fabs(diff)));
    if (diff > 0) excess += diff;
    else deficit -= diff;
  }
  out.tv = static_cast<double>((excess + deficit) / 2.0L);
  if (max_dev <= 1e-12) return out;
  out.modified = true;
  std::vector<bool> plus(ny);
  std::vector<double> theta(ny, 1.0), gamma(ny, 0.0);
  for (int y = 0; y < ny; ++y) {
    plus[y] = law[y] > target[y];
    if (plus[y]) {
      theta[y] = static_cast<double>(target[y] / law[y]);
    } else if (deficit > 0) {
      gamma[y] = static_cast<double>((target[y] - law[y]) / deficit);
    }
  }
  for (int w = 0; w < nw; ++w) {
    double* row = &out.kernel[static_cast<std::size_t>(w) * ny];
    long double phi = 0.0L;
    for (int y = 0; y < ny; ++y) {
      if (plus[y]) phi += (1.0L - theta[y]) * row[y];
    }
    out.max_phi = std::max(out.max_phi, static_cast<double>(phi));
    for (int y = 0; y < ny; ++y) {
      row[y] = plus[y] ? theta[y] * row[y]
                       : static_cast<double>(row[y] + phi * gamma[y]);
    }
  }
  return out;
}

Json ToJson(const RatePoint& p) {
  Json j;
  j["setting"] = p.setting;
  j["rate"] = ReportNumber(p.rate);
  j["r"] = ReportNumber(p.r);
  j["r_sum"] = ReportNumber(p.r_sum);
  j["r_c"] = ReportNumber(p.r_c);
  j["sum_active"] = p.sum_active;
  j["delta"] = ReportNumber(p.delta);
  j["v_size"] = p.v_size;
  j["restarts"] = p.restarts;
  j["converged"] = p.converged;
  j["boundary_kind"] = p.boundary_kind;
  if (p.candidate) j["candidate"] = ToJson(p.candidate->joint);
  return j;
}

Json ToJson(const RegionQuery& q) {
  Json j;
  j["p_xz"] = ToJson(q.p_xz);
  j["d"] = ToJson(q.d);
  j["setting"] = q.setting.Name();
  j["delta"] = q.delta;
  j["r_c"] = std::isfinite(q.r_c) ? Json(q.r_c) : Json("inf");
  j["v_size"] = q.v_size;
  j["optimizer"] = {{"restarts", q.optimizer.restarts},
                    {"outer_rounds", q.optimizer.outer_rounds},
                    {"inner_iterations", q.optimizer.inner_iterations},
                    {"tolerance", q.optimizer.tolerance},
                    {"seed", q.optimizer.seed}};
  return j;
}

RegionQuery RegionQueryFromJson(const Json& j) {
  auto need = [&](const char* key) -> const Json& {
    if (!j.is_object() || !j.contains(key)) {
      Fail(ErrorCode::kSchema, std::string("schema: region query needs '") +
                                   key + "'");
    }
    return j[key];
  };
  const Json& r_c = need("r_c");
  double rc = kUnbounded;
  if (r_c.is_string()) {
    rc = ParseReal(r_c.get<std::string>());
  } else if (r_c.is_number()) {
    rc = r_c.get<double>();
  } else {
    Fail(ErrorCode::kSchema, "schema: 'r_c' must be a number or \"inf\"");
  }
  if (!need("delta").is_number() || !need("setting").is_string()) {
    Fail(ErrorCode::kSchema, "schema: 'delta' must be a number and 'setting' a string");
  }
  RegionQuery q{JointPmfFromJson(need("p_xz")), DistortionFromJson(need("d")),
                Setting::Parse(need("setting").get<std::string>()),
                need("delta").get<double>(), rc, 0, OptimizerConfig{}};
  if (j.contains("v_size")) q.v_size = j["v_size"].get<int>();
  if (j.contains("optimizer")) {
    const Json& o = j["optimizer"];
    q.optimizer.restarts = o.value("restarts", q.optimizer.restarts);
    q.optimizer.outer_rounds = o.value("outer_rounds", q.optimizer.outer_rounds);
    q.optimizer.inner_iterations =
        o.value("inner_iterations", q.optimizer.inner_iterations);
    q.optimizer.tolerance = o.value("tolerance", q.optimizer.tolerance);
    q.optimizer.seed = o.value("seed", q.optimizer.seed);
  }
  return q;
}

}  // namespace rdplab
