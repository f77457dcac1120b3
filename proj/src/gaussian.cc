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

#include "rdplab/gaussian.h"

#include <algorithm>
#include <cmath>

#include "rdplab/error.h"
#include "rdplab/rng.h"

namespace rdplab {
namespace {

void CheckDelta(double delta) {
  Require(std::isfinite(delta) && delta > 0.0 && delta <= 2.0,
          "delta must lie in (0, 2]");
}

// 2^{-2 r_c}, or 0 when unbounded.
double Attenuation(CrRate r_c) {
  return r_c.unbounded() ? 0.0 : std::exp2(-2.0 * r_c.bits());
}

}  // namespace

CrRate CrRate::Bits(double bits) {
  Require(std::isfinite(bits) && bits >= 0.0,
          "common-randomness rate must be a finite nonnegative number");
  return CrRate(bits, false);
}

double RhoResidual(double rho, double delta, CrRate r_c) {
  const double c = Attenuation(r_c);
  return 1.0 - delta / 2.0 - rho * std::sqrt(1.0 - c * (1.0 - rho * rho));
}

double SolveRho(double delta, CrRate r_c) {
  CheckDelta(delta);
  const double a = 1.0 - delta / 2.0;
  if (a == 0.0) return 0.0;
  if (r_c.unbounded()) return a;
  // c rho^4 + (1 - c) rho^2 - a^2 = 0, positive root in a cancellation-free
  // form.
  const double c = Attenuation(r_c);
  const double rho2 =
      2.0 * a * a / ((1.0 - c) + std::sqrt((1.0 - c) * (1.0 - c) + 4.0 * c * a * a));
  double rho = std::sqrt(rho2);
  // One Newton step on the defining equation.
  const double root = std::sqrt(1.0 - c * (1.0 - rho * rho));
  const double f = rho * root - a;
  const double df = root + c * rho * rho / root;
  const double polished = rho - f / df;
  if (std::fabs(RhoResidual(polished, delta, r_c)) <=
      std::fabs(RhoResidual(rho, delta, r_c))) {
    rho = polished;
  }
  return rho;
}

double RateNormal(double delta, CrRate r_c) {
  CheckDelta(delta);
  if (r_c.unbounded()) {
    // 1 - rho^2 with rho = 1 - delta/2.
    return std::max(0.0, 0.5 * std::log2(1.0 / (delta * (1.0 - delta / 4.0))));
  }
  // u = 1 - rho^2 solves c u^2 - (1 + c) u + b = 0 with b = 1 - a^2 =
  // delta (1 - delta/4); the small root avoids cancellation near rho = 1.
  const double c = Attenuation(r_c);
  const double b = delta * (1.0 - delta / 4.0);
  const double u =
      2.0 * b / ((1.0 + c) + std::sqrt((1.0 + c) * (1.0 + c) - 4.0 * c * b));
  return std::max(0.0, -0.5 * std::log2(u));
}

double ClassicalGaussianRate(double delta) {
  Require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
  return std::max(0.0, 0.5 * std::log2(1.0 / delta));
}

double RateBivariate(double delta, double eta) {
  Require(std::isfinite(eta) && std::fabs(eta) < 1.0, "eta must lie in (-1, 1)");
  Require(std::isfinite(delta) && delta > 0.0 &&
              delta <= 2.0 - 2.0 * std::fabs(eta) + 1e-15,
          "delta must lie in (0, 2 - 2|eta|]");
  // 1 - rho^2 = delta (1 - delta/4).
  const double one_minus_rho2 = delta * (1.0 - delta / 4.0);
  return std::max(0.0, 0.5 * std::log2((1.0 - eta * eta) / one_minus_rho2));
}

double AuxB(double rho, double eta) {
  Require(std::isfinite(rho) && std::isfinite(eta) && rho < 1.0 &&
              std::fabs(eta) <= rho,
          "aux_b needs |eta| <= rho < 1");
  const double e2 = eta * eta;
  const double num = std::max(0.0, rho * rho - e2);
  return std::sqrt(num / (1.0 + e2 * rho * rho - 2.0 * e2));
}

Eigen::Matrix3d GaussianCandidate::Covariance() const {
  // Order (Z, X, V).
  Eigen::Matrix3d s;
  s << 1.0, eta, eta * b,
       eta, 1.0, b,
       eta * b, b, 1.0;
  return s;
}

Eigen::Vector2d GaussianCandidate::MmseCoefficients() const {
  const double den = 1.0 - eta * eta * b * b;
  return {eta * (1.0 - b * b) / den, b * (1.0 - eta * eta) / den};
}

GaussianCandidate MakeGaussianCandidate(double delta, double eta) {
  RateBivariate(delta, eta);  // validates the query
  GaussianCandidate g;
  g.eta = eta;
  g.rho = 1.0 - delta / 2.0;
  g.b = AuxB(std::max(g.rho, std::fabs(eta)), eta);
  return g;
}

ConditionalGaussianResult ConditionalGaussian(
    const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
    const std::vector<int>& observed, const Eigen::VectorXd& values) {
  const int n = static_cast<int>(mean.size());
  Require(cov.rows() == n && cov.cols() == n, "covariance shape mismatch");
  Require(static_cast<int>(observed.size()) == values.size(),
          "one value per observed coordinate is required");
  Require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          "covariance must be symmetric");
  std::vector<bool> is_obs(n, false);
  for (int k : observed) {
    Require(k >= 0 && k < n && !is_obs[k], "invalid observed index");
    is_obs[k] = true;
  }
  std::vector<int> hidden;
  for (int k = 0; k < n; ++k) {
    if (!is_obs[k]) hidden.push_back(k);
  }
  const int h = static_cast<int>(hidden.size());
  const int o = static_cast<int>(observed.size());
  Eigen::MatrixXd s11(h, h), s12(h, o), s22(o, o);
  Eigen::VectorXd m1(h), m2(o);
  for (int i = 0; i < h; ++i) {
    m1(i) = mean(hidden[i]);
    for (int k = 0; k < h; ++k) s11(i, k) = cov(hidden[i], hidden[k]);
    for (int k = 0; k < o; ++k) s12(i, k) = cov(hidden[i], observed[k]);
  }
  for (int i = 0; i < o; ++i) {
    m2(i) = mean(observed[i]);
    for (int k = 0; k < o; ++k) s22(i, k) = cov(observed[i], observed[k]);
  }
  ConditionalGaussianResult out;
  if (o == 0) {
    out.mean = m1;
    out.cov = s11;
    return out;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(s22);
  if (llt.info() != Eigen::Success ||
      llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-12) {
    Fail(ErrorCode::kInvalidArgument, "observed covariance block is singular");
  }
  const Eigen::MatrixXd gain = llt.solve(s12.transpose()).transpose();
  out.mean = m1 + gain * (values - m2);
  out.cov = s11 - gain * s12.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

McReport McVerifyBivariate(double delta, double eta, long long samples,
                           std::uint64_t seed, int streams) {
  Require(samples >= 10000, "at least 10^4 samples are required");
  Require(streams >= 1, "at least one stream is required");
  const GaussianCandidate g = MakeGaussianCandidate(delta, eta);
  const Eigen::Vector2d coef = g.MmseCoefficients();
  const double sz = std::sqrt(1.0 - eta * eta);
  const double sv = std::sqrt(1.0 - g.b * g.b);
  // Moments are accumulated per stream and summed; the split is a pure
  // function of (samples, streams).
  long double sum_m2 = 0.0L, sum_d = 0.0L, sum_xz = 0.0L;
  for (int s = 0; s < streams; ++s) {
    const long long count =
        samples / streams + (s < samples % streams ? 1 : 0);
    CounterRng rng(seed, static_cast<std::uint64_t>(s));
    long double m2 = 0.0L, dd = 0.0L, xz = 0.0L;
    for (long long i = 0; i < count; ++i) {
      const double xt = rng.Normal();
      const double zt = rng.Normal();
      const double vt = rng.Normal();
      const double z = eta * xt + sz * zt;
      const double x = xt;
      const double v = g.b * xt + sv * vt;
      const double mmse = coef(0) * z + coef(1) * v;
      const double y = mmse / g.rho;
      m2 += mmse * mmse;
      dd += (x - y) * (x - y);
      xz += x * z;
    }
    sum_m2 += m2;
    sum_d += dd;
    sum_xz += xz;
  }
  McReport r;
  r.samples = samples;
  r.est_rho2 = static_cast<double>(sum_m2 / samples);
  r.est_distortion = static_cast<double>(sum_d / samples);
  r.est_eta = static_cast<double>(sum_xz / samples);
  r.est_cond_mi = 0.5 * std::log2((1.0 - r.est_eta * r.est_eta) /
                                  (1.0 - r.est_rho2));
  return r;
}

double UiBound(double tau, double fourth_moment) {
  Require(std::isfinite(tau) && tau >= 0.0 && tau <= 1.0,
          "tau must lie in [0, 1]");
  Require(std::isfinite(fourth_moment) && fourth_moment >= 0.0,
          "the fourth moment must be nonnegative");
  return 4.0 * std::sqrt(tau * fourth_moment);
}

}  // namespace rdplab
