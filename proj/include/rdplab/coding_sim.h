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

#ifndef RDPLAB_CODING_SIM_H_
#define RDPLAB_CODING_SIM_H_

// Finite-blocklength simulation of the random-codebook schemes.
//
// ED mode (side information at both terminals): for every side-information
// string z^n there is a sub-codebook of floor(2^{n(r+eps)}) * floor(2^{n r_c})
// codewords with letters drawn from p(v | z_t). The encoder picks the message
// by the likelihood rule, the decoder passes (z_t, v_t) through p(y | z, v).
//
// D mode (decoder-only side information): a single codebook of
// floor(2^{n(r+eps)}) * floor(2^{n r'}) * floor(2^{n r_c}) codewords drawn
// from p_V. The encoder picks (m, m') by likelihood; only m is sent and the
// decoder recovers m' by joint typicality with z^n.
//
// Block strings are indexed most-significant-letter first:
// index(s) = sum_t s_t |A|^{n-1-t}.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rdplab/json_io.h"
#include "rdplab/probability.h"
#include "rdplab/regions.h"
#include "rdplab/rng.h"

namespace rdplab {

enum class SchemeMode { kED, kD };

struct SchemeSpec {
  SchemeMode mode = SchemeMode::kED;
  Realism realism = Realism::kMarginal;
  int n = 1;
  double r = 0.0;
  double r_c = 0.0;
  double epsilon = 0.05;
  double r_prime = 0.0;  // derived in D mode
  double eps_typ = 0.1;
  std::uint64_t seed = 0;
  Candidate candidate;
  DistortionMatrix d;

  long long messages() const;          // floor(2^{n(r+eps)})
  long long virtual_messages() const;  // floor(2^{n r'}), 1 in ED mode
  long long common() const;            // floor(2^{n r_c})
};

// Validates the inputs and derives r'. In D mode, r' = 0 when I(Z;V) = 0 and
// otherwise lies in (I(Z;V) - eps, I(Z;V)) intersected with (0, inf): an
// explicit value is checked against that interval, the default is
// I(Z;V) - eps/2 (or I(Z;V)/2 when that is not positive). D mode also checks
// that the codebook rates exceed I(X,Z;V) and I(Y;V) (kInfeasible otherwise)
// and that V is independent of Z given X.
SchemeSpec MakeSchemeSpec(SchemeMode mode, int n, double r, double r_c,
                          double epsilon, const Candidate& candidate,
                          const DistortionMatrix& d, std::uint64_t seed = 0,
                          double eps_typ = 0.1,
                          Realism realism = Realism::kMarginal,
                          std::optional<double> r_prime = std::nullopt);

Json ToJson(const SchemeSpec& spec);
SchemeSpec SchemeSpecFromJson(const Json& j);
// FNV-1a over the canonical JSON serialization, as 16 hex digits.
std::string SpecDigest(const SchemeSpec& spec);

long long BlockIndex(std::span<const int> letters, int alphabet);
std::vector<int> BlockLetters(long long index, int n, int alphabet);

// Seed of the k-th codebook drawn for a spec.
std::uint64_t CodebookSeed(std::uint64_t spec_seed, int k);

// Single-letter kernels derived from the candidate.
struct SchemeModel {
  int nx = 0, nz = 0, nv = 0, ny = 0;
  std::vector<double> p_xz;        // x * nz + z
  std::vector<double> p_v;         // v
  std::vector<double> p_v_given_z; // z * nv + v
  std::vector<double> p_x_given_zv;  // (z * nv + v) * nx + x
  std::vector<double> p_x_given_v;   // v * nx + x
  std::vector<double> p_z_given_v;   // v * nz + z
  std::vector<double> p_z_given_x;   // x * nz + z
  std::vector<double> p_vz;          // v * nz + z
  std::vector<double> channel;       // (z * nv + v) * ny + y
};
SchemeModel MakeSchemeModel(const Candidate& c);

class Codebook {
 public:
  Codebook(const SchemeSpec& spec, std::uint64_t codebook_seed);

  const SchemeSpec& spec() const { return spec_; }
  const SchemeModel& model() const { return model_; }
  std::uint64_t seed() const { return seed_; }
  int n() const { return spec_.n; }
  long long messages() const { return messages_; }
  long long virtual_messages() const { return virtual_; }
  long long common() const { return common_; }
  // Codewords addressable for one side-information string.
  long long size_per_string() const { return messages_ * virtual_ * common_; }

  // ED: codeword v^n(m, j) of the sub-codebook for z^n (m_prime ignored).
  // D: codeword v^n(m, m', j) (zn_index ignored).
  std::span<const std::uint16_t> Codeword(long long zn_index, long long m,
                                          long long m_prime, long long j) const;

 private:
  const std::vector<std::uint16_t>& SubCodebook(long long zn_index) const;

  SchemeSpec spec_;
  SchemeModel model_;
  std::uint64_t seed_;
  long long messages_, virtual_, common_;
  std::vector<std::uint16_t> flat_;  // D mode
  mutable std::mutex mu_;
  mutable std::unordered_map<long long, std::vector<std::uint16_t>> sub_;
};

struct EncodeResult {
  std::vector<double> posterior;  // over m (ED) or m * M' + m' (D)
  long long index = 0;            // sampled entry of `posterior`
  bool fallback = false;          // zero total likelihood -> uniform
};
// Likelihood encoder. With rng == nullptr no index is sampled.
EncodeResult LikelihoodEncode(const Codebook& cb, std::span<const int> xn,
                              std::span<const int> zn, long long j,
                              CounterRng* rng);

struct DecodeResult {
  long long m_prime = 0;
  bool ok = true;
  int typical = 0;  // number of typical candidates
};
// Strong typicality: the joint type of (v^n, z^n) is within eps_typ of
// p_{V,Z} in every cell and vanishes where p_{V,Z} does.
DecodeResult DecodeVirtual(const Codebook& cb, long long m, long long j,
                           std::span<const int> zn, double eps_typ);
bool JointlyTypical(const SchemeModel& model, std::span<const std::uint16_t> vn,
                    std::span<const int> zn, double eps_typ);

std::vector<int> SynthesizeOutput(const Codebook& cb,
                                  std::span<const std::uint16_t> codeword,
                                  std::span<const int> zn, CounterRng& rng);

// Joint law over (xn, zn, j, m, yn) with block alphabets flattened into
// single axes.
struct InducedCode {
  JointPmf joint;
  int n = 1;
  int x_size = 0, z_size = 0, y_size = 0;
  std::string provenance;
};
Json ToJson(const InducedCode& code);
InducedCode InducedCodeFromJson(const Json& j);
// E[(1/n) sum_t d(X_t, Y_t)] under the code's joint law.
double BlockDistortion(const InducedCode& code, const DistortionMatrix& d);

struct ExactAnalysis {
  // Output law under Q1 given the codebook: over y^n (marginal realism) or
  // (z^n, y^n) (joint realism), and its TV to the product target.
  std::vector<double> output;
  double tv_to_target = 0.0;
  // Distortion of the idealized-source law that shares the code's kernels
  // (Q1 in ED mode; Q1 followed by the virtual decoder in D mode).
  double q_distortion = 0.0;
  // Available when |X|^n |Z|^n J fits the enumeration cap.
  std::optional<double> tv_p1_q1;
  std::optional<double> p1_distortion;
  std::optional<InducedCode> induced;  // when requested and within the cap
};
struct ExactOptions {
  bool p1 = true;        // TV(P1, Q1) and the P1 distortion
  bool induced = false;  // the P1-corrected InducedCode
};
ExactAnalysis AnalyzeExact(const Codebook& cb, const ExactOptions& options = {});

// Exact factorization checks on an enumerable InducedCode.
struct FactorizationCheck {
  double source_tv = 0.0;  // TV(P_{Xn,Zn,J}, p^n x uniform)
  double markov_xy = 0.0;  // I(Xn; Yn | Zn, J, M)
  double markov_zm = 0.0;  // I(Zn; M | Xn, J)
};
FactorizationCheck CheckFactorization(const InducedCode& code,
                                      const JointPmf& p_xz);

struct ExperimentReport {
  std::string spec_digest;
  int n = 0;
  long long trials = 0;
  double mean_distortion = 0.0;
  double ci95 = 0.0;
  double mprime_error_rate = 0.0;
  long long flagged_trials = 0;
  std::optional<double> tv_plugin;  // diagnostic only; biased at large n
  std::optional<double> tv_exact;
};
ExperimentReport RunExperiment(const Codebook& cb, long long trials);

// Best (smallest exact tv_to_target) of k seeded codebooks.
struct Selection {
  int index = 0;
  std::shared_ptr<const Codebook> codebook;
  ExactAnalysis analysis;  // without the P1 quantities
};
Selection SelectCodebook(const SchemeSpec& spec, int k);

Json ToJson(const ExperimentReport& r);

}  // namespace rdplab

#endif  // RDPLAB_CODING_SIM_H_
