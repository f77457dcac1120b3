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

#include "rdplab/upgrader.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "rdplab/error.h"

namespace rdplab {
namespace {

constexpr double kMarkovTolerance = 1e-9;
constexpr double kExactTolerance = 1e-12;

std::string Format(const char* what, double value) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s (%.3g)", what, value);
  return buf;
}

// Axes of the code in the canonical order (xn, zn, W..., yn).
std::vector<std::string> CanonicalAxes(const InducedCode& code) {
  for (const char* axis : {"xn", "zn", "yn"}) {
    Require(code.joint.HasAxis(axis),
            std::string("induced code needs axis '") + axis + "'");
  }
  std::vector<std::string> order = {"xn", "zn"};
  for (const Axis& a : code.joint.axes()) {
    if (a.name != "xn" && a.name != "zn" && a.name != "yn") {
      order.push_back(a.name);
    }
  }
  order.push_back("yn");
  return order;
}

std::vector<std::string> AxisNames(const JointPmf& p) {
  std::vector<std::string> names;
  for (const Axis& a : p.axes()) names.push_back(a.name);
  return names;
}

// Realism marginal of a canonical-order table: over y (marginal) or (z, y).
std::vector<double> RealismMarginal(std::span<const double> data, long long nx,
                                    long long nz, long long nw, long long ny,
                                    Realism mode) {
  std::vector<double> out(mode == Realism::kJoint ? nz * ny : ny, 0.0);
  std::size_t i = 0;
  for (long long x = 0; x < nx; ++x) {
    for (long long z = 0; z < nz; ++z) {
      for (long long w = 0; w < nw; ++w) {
        for (long long y = 0; y < ny; ++y, ++i) {
          out[mode == Realism::kJoint ? z * ny + y : y] += data[i];
        }
      }
    }
  }
  return out;
}

double MaxDeviation(std::span<const double> a, std::span<const double> b) {
  double dev = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dev = std::max(dev, std::abs(a[i] - b[i]));
  }
  return dev;
}

}  // namespace

std::vector<double> ProductTarget(const JointPmf& p_xz, int n, Realism mode) {
  Require(p_xz.rank() == 2, "p_xz must have two axes");
  Require(n >= 1, "blocklength must be at least 1");
  const int nx = p_xz.axes()[0].size;
  const int nz = p_xz.axes()[1].size;
  const bool joint = mode == Realism::kJoint;
  // Letters are (z, y) pairs in joint mode, y alone otherwise.
  const int na = joint ? nz : 1;
  std::vector<double> letter(static_cast<std::size_t>(na) * nx, 0.0);
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) {
      letter[(joint ? z : 0) * nx + x] += p_xz.at({x, z});
    }
  }
  double yn = 1.0, zn = 1.0;
  for (int t = 0; t < n; ++t) {
    yn *= nx;
    zn *= na;
  }
  CheckCap(yn * zn, "product target");
  const long long y_count = static_cast<long long>(yn);
  std::vector<double> out(static_cast<std::size_t>(yn * zn));
  for (std::size_t i = 0; i < out.size(); ++i) {
    long long zi = static_cast<long long>(i) / y_count;
    long long yi = static_cast<long long>(i) % y_count;
    double p = 1.0;
    for (int t = n - 1; t >= 0; --t) {
      p *= letter[(zi % na) * nx + yi % nx];
      zi /= na;
      yi /= nx;
    }
    out[i] = p;
  }
  return out;
}

UpgradeOutput Upgrade(const InducedCode& code, std::span<const double> target,
                      Realism mode, const DistortionMatrix& d) {
  const std::vector<std::string> order = CanonicalAxes(code);
  const JointPmf p = code.joint.Marginal(order);
  const long long nx = p.axis("xn").size;
  const long long nz = p.axis("zn").size;
  const long long ny = p.axis("yn").size;
  const long long nw =
      static_cast<long long>(p.size()) / (nx * nz * ny);
  const bool joint = mode == Realism::kJoint;
  Require(static_cast<long long>(target.size()) == (joint ? nz * ny : ny),
          "target size does not match the code's output alphabet");
  double target_mass = 0.0;
  for (double t : target) {
    Require(t >= 0.0, "target must be nonnegative");
    target_mass += t;
  }
  Require(std::abs(target_mass - 1.0) <= kMassTolerance,
          "target must sum to one");

  const AxisGroup w_axes(order.begin() + 1, order.end() - 1);  // zn, W...
  const double markov =
      ConditionalMutualInformation(p, {"xn"}, {"yn"}, w_axes);
  if (markov > kMarkovTolerance) {
    Fail(ErrorCode::kInvalidArgument,
         Format("Markov hypothesis Xn - (Zn, W) - Yn violated: "
                "I(Xn;Yn|Zn,W) in bits",
                markov));
  }

  const std::span<const double> data = p.data();
  // P(z, w) and the decoder kernel K(y | z, w).
  std::vector<double> p_zw(static_cast<std::size_t>(nz * nw), 0.0);
  std::vector<double> kernel(static_cast<std::size_t>(nz * nw * ny), 0.0);
  std::size_t i = 0;
  for (long long x = 0; x < nx; ++x) {
    for (long long zw = 0; zw < nz * nw; ++zw) {
      for (long long y = 0; y < ny; ++y, ++i) {
        kernel[zw * ny + y] += data[i];
        p_zw[zw] += data[i];
      }
    }
  }
  for (long long zw = 0; zw < nz * nw; ++zw) {
    for (long long y = 0; y < ny; ++y) {
      double& k = kernel[zw * ny + y];
      k = p_zw[zw] > 0.0 ? k / p_zw[zw] : 1.0 / static_cast<double>(ny);
    }
  }

  std::vector<double> p_z(nz, 0.0), target_z(nz, 0.0);
  for (long long z = 0; z < nz; ++z) {
    for (long long w = 0; w < nw; ++w) p_z[z] += p_zw[z * nw + w];
    if (joint) {
      for (long long y = 0; y < ny; ++y) target_z[z] += target[z * ny + y];
    }
  }
  if (joint) {
    const double dev = MaxDeviation(p_z, target_z);
    if (dev > kMarkovTolerance) {
      Fail(ErrorCode::kInvalidArgument,
           Format("side-information marginal differs from the target", dev));
    }
  }

  UpgradeOutput out{code, {}};
  out.diagnostics.tv_before = TvDistance(
      RealismMarginal(data, nx, nz, nw, ny, mode),
      std::vector<double>(target.begin(), target.end()));

  // Surgery per side-information string (joint) or over all (z, w).
  std::vector<bool> moved(nz, false);
  if (joint) {
    for (long long z = 0; z < nz; ++z) {
      if (p_z[z] <= 0.0) continue;
      std::vector<double> w_law(nw), t_law(ny);
      for (long long w = 0; w < nw; ++w) w_law[w] = p_zw[z * nw + w] / p_z[z];
      for (long long y = 0; y < ny; ++y) {
        t_law[y] = target_z[z] > 0.0 ? target[z * ny + y] / target_z[z] : 0.0;
      }
      const std::span<double> rows(&kernel[z * nw * ny], nw * ny);
      SurgeryResult s = RealismSurgery(w_law, rows, t_law);
      if (!s.modified) continue;
      moved[z] = true;
      ++out.diagnostics.modified_blocks;
      out.diagnostics.max_phi = std::max(out.diagnostics.max_phi, s.max_phi);
      std::copy(s.kernel.begin(), s.kernel.end(), rows.begin());
    }
  } else {
    SurgeryResult s = RealismSurgery(p_zw, kernel, target);
    if (s.modified) {
      std::fill(moved.begin(), moved.end(), true);
      out.diagnostics.modified_blocks = static_cast<int>(nz);
      out.diagnostics.max_phi = s.max_phi;
      kernel = std::move(s.kernel);
    }
  }

  // P' = P(x, z, w) K'(y | z, w); untouched blocks are copied verbatim.
  std::vector<double> next(data.begin(), data.end());
  i = 0;
  for (long long x = 0; x < nx; ++x) {
    for (long long z = 0; z < nz; ++z) {
      for (long long w = 0; w < nw; ++w) {
        if (!moved[z]) {
          i += ny;
          continue;
        }
        double p_xzw = 0.0;
        for (long long y = 0; y < ny; ++y) p_xzw += data[i + y];
        const long long zw = z * nw + w;
        for (long long y = 0; y < ny; ++y, ++i) {
          next[i] = p_xzw * kernel[zw * ny + y];
        }
      }
    }
  }
  const std::vector<double> realized =
      RealismMarginal(next, nx, nz, nw, ny, mode);
  out.diagnostics.max_deviation = MaxDeviation(realized, target);
  if (out.diagnostics.max_deviation > kExactTolerance) {
    Fail(ErrorCode::kNumerical,
         Format("upgraded output misses the target", 
                out.diagnostics.max_deviation));
  }
  JointPmf upgraded(p.axes(), std::move(next));
  out.diagnostics.tv_p_pprime = TvDistance(p.data(), upgraded.data());
  out.code.joint = upgraded.Marginal(AxisNames(code.joint));
  out.code.provenance = "upgraded";
  out.diagnostics.distortion_before = BlockDistortion(code, d);
  out.diagnostics.distortion_after = BlockDistortion(out.code, d);
  return out;
}

VerifyReport VerifyUpgrade(const InducedCode& before,
                           std::span<const double> target, Realism mode,
                           const UpgradeOutput& out, const DistortionMatrix& d,
                           const std::optional<ReferenceStats>& reference) {
  VerifyReport r;
  const std::vector<std::string> order = CanonicalAxes(before);
  const JointPmf p = before.joint.Marginal(order);
  const JointPmf q = out.code.joint.Marginal(order);
  const long long nx = p.axis("xn").size;
  const long long nz = p.axis("zn").size;
  const long long ny = p.axis("yn").size;
  const long long nw = static_cast<long long>(p.size()) / (nx * nz * ny);
  Require(p.axes() == q.axes(), "upgraded code has different axes");

  const std::vector<double> t(target.begin(), target.end());
  r.max_deviation =
      MaxDeviation(RealismMarginal(q.data(), nx, nz, nw, ny, mode), t);
  if (r.max_deviation > kExactTolerance) {
    r.failures.push_back(Format("realism marginal deviation", r.max_deviation));
  }

  r.tv_p_pprime = TvDistance(p.data(), q.data());
  r.tv_budget = TvDistance(RealismMarginal(p.data(), nx, nz, nw, ny, mode), t);
  if (r.tv_p_pprime > r.tv_budget + kExactTolerance) {
    r.failures.push_back(Format("TV(P', P) exceeds the realism gap",
                                r.tv_p_pprime - r.tv_budget));
  }

  const AxisGroup source(order.begin(), order.end() - 1);
  r.encoder_tv = TvDistance(p.Marginal(source), q.Marginal(source));
  if (r.encoder_tv > kExactTolerance) {
    r.failures.push_back(Format("encoder law changed", r.encoder_tv));
  }

  // Every decoder row of P' must be a pmf where P(z, w) > 0.
  const std::span<const double> qd = q.data();
  std::vector<double> mass(static_cast<std::size_t>(nz * nw), 0.0);
  std::vector<double> rows(static_cast<std::size_t>(nz * nw * ny), 0.0);
  std::size_t i = 0;
  for (long long x = 0; x < nx; ++x) {
    for (long long zw = 0; zw < nz * nw; ++zw) {
      for (long long y = 0; y < ny; ++y, ++i) {
        rows[zw * ny + y] += qd[i];
        mass[zw] += qd[i];
      }
    }
  }
  for (long long zw = 0; zw < nz * nw; ++zw) {
    if (mass[zw] <= 0.0) continue;
    double total = 0.0;
    for (long long y = 0; y < ny; ++y) {
      const double k = rows[zw * ny + y] / mass[zw];
      if (k < -kExactTolerance) total = -1.0;
      total += k;
    }
    r.max_row_error = std::max(r.max_row_error, std::abs(total - 1.0));
  }
  if (r.max_row_error > kExactTolerance) {
    r.failures.push_back(Format("decoder row is not a pmf", r.max_row_error));
  }

  if (reference.has_value()) {
    r.distortion_after = BlockDistortion(out.code, d);
    r.distortion_bound =
        reference->distortion +
        d.max() * (reference->eps2 + reference->eps3 + reference->eps4);
    if (*r.distortion_after > *r.distortion_bound + kExactTolerance) {
      r.failures.push_back(Format("distortion exceeds the reference bound",
                                  *r.distortion_after - *r.distortion_bound));
    }
  }
  r.ok = r.failures.empty();
  return r;
}

Json ToJson(const UpgradeDiagnostics& diag) {
  Json j;
  j["tv_before"] = ReportNumber(diag.tv_before);
  j["tv_p_pprime"] = ReportNumber(diag.tv_p_pprime);
  j["distortion_before"] = ReportNumber(diag.distortion_before);
  j["distortion_after"] = ReportNumber(diag.distortion_after);
  j["max_phi"] = ReportNumber(diag.max_phi);
  j["max_deviation"] = diag.max_deviation;
  j["modified_blocks"] = diag.modified_blocks;
  return j;
}

Json ToJson(const VerifyReport& report) {
  Json j;
  j["ok"] = report.ok;
  j["max_deviation"] = report.max_deviation;
  j["tv_p_pprime"] = ReportNumber(report.tv_p_pprime);
  j["tv_budget"] = ReportNumber(report.tv_budget);
  j["encoder_tv"] = report.encoder_tv;
  j["max_row_error"] = report.max_row_error;
  if (report.distortion_after.has_value()) {
    j["distortion_after"] = ReportNumber(*report.distortion_after);
    j["distortion_bound"] = ReportNumber(*report.distortion_bound);
  }
  j["failures"] = report.failures;
  return j;
}

}  // namespace rdplab
