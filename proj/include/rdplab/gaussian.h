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

#ifndef RDPLAB_GAUSSIAN_H_
#define RDPLAB_GAUSSIAN_H_

// Closed-form trade-offs for unit-variance Gaussian sources under squared
// error with perfect realism, and Monte Carlo checks of the achieving
// construction.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace rdplab {

// Common-randomness rate: a finite number of bits or unbounded. Unbounded is
// a distinguished value so that the limit formulas are evaluated exactly.
class CrRate {
 public:
  static CrRate Bits(double bits);
  static CrRate Unbounded() { return CrRate(0.0, true); }

  bool unbounded() const { return unbounded_; }
  double bits() const { return bits_; }

 private:
  CrRate(double bits, bool unbounded) : bits_(bits), unbounded_(unbounded) {}
  double bits_;
  bool unbounded_;
};

// Unique rho in [0,1) with 1 - delta/2 = rho * sqrt(1 - 2^{-2 r_c}(1 - rho^2)).
// delta must lie in (0, 2]; delta = 2 gives rho = 0.
double SolveRho(double delta, CrRate r_c);
// Residual of the defining equation at rho.
double RhoResidual(double rho, double delta, CrRate r_c);

// Minimal rate (bits) for X ~ N(0,1), MSE distortion delta, perfect realism:
// (1/2) log 1/(1 - rho^2).
double RateNormal(double delta, CrRate r_c);
// Without a realism constraint: max(0, (1/2) log 1/delta).
double ClassicalGaussianRate(double delta);

// Side information Z with correlation eta to X, available at both terminals
// or at the decoder only (the two coincide): rho = 1 - delta/2 and
// R = (1/2) log((1 - eta^2)/(1 - rho^2)) for delta in (0, 2 - 2|eta|].
double RateBivariate(double delta, double eta);

// b = sqrt((rho^2 - eta^2)/(1 + eta^2 rho^2 - 2 eta^2)) for |eta| <= rho < 1.
double AuxB(double rho, double eta);

// The achieving triple (Z, X, V) = (eta X~ + sqrt(1-eta^2) Z~, X~,
// b X~ + sqrt(1-b^2) V~) with independent standard normals.
struct GaussianCandidate {
  double eta = 0.0;
  double b = 0.0;
  double rho = 0.0;

  // Covariance of (Z, X, V).
  Eigen::Matrix3d Covariance() const;
  // Coefficients (c_z, c_v) of E[X | Z, V] = c_z Z + c_v V.
  Eigen::Vector2d MmseCoefficients() const;
};
GaussianCandidate MakeGaussianCandidate(double delta, double eta);

struct ConditionalGaussianResult {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
// Law of the unobserved coordinates given x_observed = values.
ConditionalGaussianResult ConditionalGaussian(
    const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
    const std::vector<int>& observed, const Eigen::VectorXd& values);

struct McReport {
  long long samples = 0;
  double est_rho2 = 0.0;        // mean of E[X|Z,V]^2
  double est_distortion = 0.0;  // mean of (X - Y)^2 with Y = E[X|Z,V] / rho
  double est_eta = 0.0;         // sample E[XZ]
  double est_cond_mi = 0.0;     // (1/2) log((1 - eta^2)/(1 - rho^2)), plug-in
};
// Samples are split over `streams` independent generators keyed by seed.
McReport McVerifyBivariate(double delta, double eta, long long samples,
                           std::uint64_t seed, int streams = 16);

// 4 sqrt(tau * m4): bound on E[(X - Y)^2 1_A] when P(A) <= tau and both X and
// Y have fourth moment m4.
double UiBound(double tau, double fourth_moment);

}  // namespace rdplab

#endif  // RDPLAB_GAUSSIAN_H_
