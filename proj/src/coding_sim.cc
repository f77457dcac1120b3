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

#include "rdplab/coding_sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>

#include "rdplab/error.h"

namespace rdplab {
namespace {

constexpr std::uint64_t kCodebookStream = 0xc0deb00c00000000ULL;
constexpr std::uint64_t kTrialKey = 0x747269616c730000ULL;

long long IndexCount(int n, double rate) {
  const double count = std::floor(std::exp2(n * rate) * (1.0 + 1e-12));
  CheckCap(count, "codebook index count");
  return std::max(1LL, static_cast<long long>(count));
}

const char* ModeName(SchemeMode mode) {
  return mode == SchemeMode::kED ? "ED" : "D";
}

// p(b | a) from a row-major table p(a, b); null rows become uniform.
std::vector<double> ConditionalRows(const std::vector<double>& joint, int na,
                                    int nb) {
  std::vector<double> rows(joint.size());
  for (int a = 0; a < na; ++a) {
    double total = 0.0;
    for (int b = 0; b < nb; ++b) total += joint[a * nb + b];
    for (int b = 0; b < nb; ++b) {
      rows[a * nb + b] = total > 0.0 ? joint[a * nb + b] / total : 1.0 / nb;
    }
  }
  return rows;
}

std::vector<double> Table(const Candidate& c, const AxisGroup& axes) {
  const JointPmf m = c.joint.Marginal(axes);
  return {m.data().begin(), m.data().end()};
}

}  // namespace

long long SchemeSpec::messages() const { return IndexCount(n, r + epsilon); }

long long SchemeSpec::virtual_messages() const {
  return mode == SchemeMode::kD ? IndexCount(n, r_prime) : 1;
}

long long SchemeSpec::common() const { return IndexCount(n, r_c); }

SchemeSpec MakeSchemeSpec(SchemeMode mode, int n, double r, double r_c,
                          double epsilon, const Candidate& candidate,
                          const DistortionMatrix& d, std::uint64_t seed,
                          double eps_typ, Realism realism,
                          std::optional<double> r_prime) {
  Require(n >= 1, "blocklength must be at least 1");
  Require(std::isfinite(r) && r >= 0.0, "r must be finite and nonnegative");
  Require(std::isfinite(r_c) && r_c >= 0.0,
          "r_c must be finite and nonnegative for a simulated scheme");
  Require(std::isfinite(epsilon) && epsilon >= 0.0,
          "epsilon must be nonnegative");
  Require(eps_typ > 0.0, "eps_typ must be positive");
  Require(d.rows() == candidate.x_size() && d.cols() == candidate.y_size(),
          "distortion shape must be |X| x |Y|");
  Require(n * std::log2(static_cast<double>(candidate.z_size())) <= 62.0 &&
              n * std::log2(static_cast<double>(candidate.x_size())) <= 62.0 &&
              n * std::log2(static_cast<double>(candidate.y_size())) <= 62.0,
          "block strings must be indexable in 62 bits");
  Require(candidate.v_size() <= 65535, "V alphabet too large");

  SchemeSpec spec{mode, realism, n, r, r_c, epsilon, 0.0, eps_typ, seed,
                  candidate, d};
  if (mode == SchemeMode::kD) {
    const double leak = ConditionalMutualInformation(candidate.joint, {"z"},
                                                     {"v"}, {"x"});
    Require(leak <= 1e-9,
            "decoder-only schemes need V independent of Z given X");
    const double i_zv = MutualInformation(candidate.joint, {"z"}, {"v"});
    if (r_prime.has_value()) {
      const double rp = *r_prime;
      const bool ok = i_zv <= 1e-12
                          ? rp == 0.0
                          : (rp > 0.0 && rp < i_zv && rp > i_zv - epsilon);
      Require(ok, "r_prime must lie in (I(Z;V) - eps, I(Z;V)) and be positive, "
                  "or be 0 when I(Z;V) = 0");
      spec.r_prime = rp;
    } else if (i_zv <= 1e-12) {
      spec.r_prime = 0.0;
    } else {
      spec.r_prime =
          i_zv - epsilon / 2.0 > 0.0 ? i_zv - epsilon / 2.0 : i_zv / 2.0;
    }
    const double i_xzv =
        MutualInformation(candidate.joint, {"x", "z"}, {"v"});
    const double i_yv = MutualInformation(candidate.joint, {"y"}, {"v"});
    const double base = r + epsilon + spec.r_prime;
    if (!(base > i_xzv - 1e-12) || !(base + r_c > i_yv - 1e-12)) {
      char msg[256];
      std::snprintf(msg, sizeof(msg),
                    "codebook rates do not cover the candidate: r+eps+r'="
                    "%.6g vs I(X,Z;V)=%.6g, r+eps+r'+r_c=%.6g vs I(Y;V)=%.6g",
                    base, i_xzv, base + r_c, i_yv);
      Fail(ErrorCode::kInfeasible, msg);
    }
  }
  CheckCap(static_cast<double>(spec.messages()) * spec.virtual_messages() *
               spec.common(),
           "codebook size");
  return spec;
}

Json ToJson(const SchemeSpec& spec) {
  Json j;
  j["mode"] = ModeName(spec.mode);
  j["realism"] = spec.realism == Realism::kJoint ? "joint" : "marginal";
  j["n"] = spec.n;
  j["r"] = spec.r;
  j["r_c"] = spec.r_c;
  j["epsilon"] = spec.epsilon;
  j["r_prime"] = spec.r_prime;
  j["eps_typ"] = spec.eps_typ;
  j["seed"] = spec.seed;
  j["candidate"] = ToJson(spec.candidate.joint);
  j["d"] = ToJson(spec.d);
  return j;
}

SchemeSpec SchemeSpecFromJson(const Json& j) {
  if (!j.is_object()) Fail(ErrorCode::kSchema, "scheme spec must be an object");
  for (const char* key : {"mode", "n", "r", "r_c", "candidate"}) {
    if (!j.contains(key)) {
      Fail(ErrorCode::kSchema, std::string("scheme spec needs '") + key + "'");
    }
  }
  try {
    const std::string mode_name = j.at("mode").get<std::string>();
    SchemeMode mode;
    if (mode_name == "ED" || mode_name == "ed") {
      mode = SchemeMode::kED;
    } else if (mode_name == "D" || mode_name == "d") {
      mode = SchemeMode::kD;
    } else {
      Fail(ErrorCode::kSchema, "mode must be 'ED' or 'D'");
    }
    Realism realism = Realism::kMarginal;
    if (j.contains("realism")) {
      const std::string name = j.at("realism").get<std::string>();
      if (name == "joint") {
        realism = Realism::kJoint;
      } else if (name != "marginal") {
        Fail(ErrorCode::kSchema, "realism must be 'marginal' or 'joint'");
      }
    }
    const Candidate c = CandidateFromJoint(JointPmfFromJson(j.at("candidate")));
    const DistortionMatrix d =
        j.contains("d") ? DistortionFromJson(j.at("d"))
                        : DistortionMatrix::Hamming(c.x_size());
    std::optional<double> r_prime;
    if (mode == SchemeMode::kD && j.contains("r_prime") &&
        !j.at("r_prime").is_null()) {
      r_prime = j.at("r_prime").get<double>();
    }
    return MakeSchemeSpec(mode, j.at("n").get<int>(), j.at("r").get<double>(),
                          j.at("r_c").get<double>(),
                          j.value("epsilon", 0.05), c, d,
                          j.value("seed", std::uint64_t{0}),
                          j.value("eps_typ", 0.1), realism, r_prime);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchema, std::string("scheme spec: ") + e.what());
  }
}

std::string SpecDigest(const SchemeSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : ToJson(spec).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

long long BlockIndex(std::span<const int> letters, int alphabet) {
  long long index = 0;
  for (int s : letters) index = index * alphabet + s;
  return index;
}

std::vector<int> BlockLetters(long long index, int n, int alphabet) {
  std::vector<int> letters(n);
  for (int t = n - 1; t >= 0; --t) {
    letters[t] = static_cast<int>(index % alphabet);
    index /= alphabet;
  }
  return letters;
}

std::uint64_t CodebookSeed(std::uint64_t spec_seed, int k) {
  CounterRng rng(spec_seed, kCodebookStream + static_cast<std::uint64_t>(k));
  return rng();
}

SchemeModel MakeSchemeModel(const Candidate& c) {
  SchemeModel m;
  m.nx = c.x_size();
  m.nz = c.z_size();
  m.nv = c.v_size();
  m.ny = c.y_size();
  m.p_xz = Table(c, {"x", "z"});
  m.p_v = Table(c, {"v"});
  m.p_vz = Table(c, {"v", "z"});
  m.p_v_given_z = ConditionalRows(Table(c, {"z", "v"}), m.nz, m.nv);
  m.p_x_given_zv = ConditionalRows(Table(c, {"z", "v", "x"}), m.nz * m.nv,
                                   m.nx);
  m.p_x_given_v = ConditionalRows(Table(c, {"v", "x"}), m.nv, m.nx);
  m.p_z_given_v = ConditionalRows(m.p_vz, m.nv, m.nz);
  m.p_z_given_x = ConditionalRows(m.p_xz, m.nx, m.nz);
  m.channel = ConditionalRows(Table(c, {"z", "v", "y"}), m.nz * m.nv, m.ny);
  return m;
}

Codebook::Codebook(const SchemeSpec& spec, std::uint64_t codebook_seed)
    : spec_(spec),
      model_(MakeSchemeModel(spec.candidate)),
      seed_(codebook_seed),
      messages_(spec.messages()),
      virtual_(spec.virtual_messages()),
      common_(spec.common()) {
  CheckCap(static_cast<double>(size_per_string()), "codebook size");
  if (spec_.mode == SchemeMode::kD) {
    CounterRng rng(seed_, 0);
    flat_.resize(static_cast<std::size_t>(size_per_string()) * spec_.n);
    for (auto& v : flat_) {
      v = static_cast<std::uint16_t>(rng.Discrete(model_.p_v));
    }
  }
}

const std::vector<std::uint16_t>& Codebook::SubCodebook(
    long long zn_index) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sub_.find(zn_index);
  if (it != sub_.end()) return it->second;
  const int n = spec_.n;
  const std::vector<int> zn = BlockLetters(zn_index, n, model_.nz);
  // Stream 0 is the D-mode codebook; sub-codebooks use 1 + index(z^n).
  CounterRng rng(seed_, static_cast<std::uint64_t>(zn_index) + 1);
  std::vector<std::uint16_t> words(
      static_cast<std::size_t>(messages_ * common_) * n);
  const std::span<const double> rows(model_.p_v_given_z);
  for (std::size_t w = 0; w < words.size() / n; ++w) {
    for (int t = 0; t < n; ++t) {
      words[w * n + t] = static_cast<std::uint16_t>(
          rng.Discrete(rows.subspan(zn[t] * model_.nv, model_.nv)));
    }
  }
  return sub_.emplace(zn_index, std::move(words)).first->second;
}

std::span<const std::uint16_t> Codebook::Codeword(long long zn_index,
                                                  long long m,
                                                  long long m_prime,
                                                  long long j) const {
  const int n = spec_.n;
  if (spec_.mode == SchemeMode::kED) {
    const auto& words = SubCodebook(zn_index);
    return std::span<const std::uint16_t>(words).subspan(
        static_cast<std::size_t>(m * common_ + j) * n, n);
  }
  return std::span<const std::uint16_t>(flat_).subspan(
      static_cast<std::size_t>((m * virtual_ + m_prime) * common_ + j) * n, n);
}

EncodeResult LikelihoodEncode(const Codebook& cb, std::span<const int> xn,
                              std::span<const int> zn, long long j,
                              CounterRng* rng) {
  const SchemeModel& model = cb.model();
  const int n = cb.n();
  const bool ed = cb.spec().mode == SchemeMode::kED;
  const long long count =
      ed ? cb.messages() : cb.messages() * cb.virtual_messages();
  const long long zn_index = ed ? BlockIndex(zn, model.nz) : 0;
  std::vector<double> log_w(count);
  double top = -std::numeric_limits<double>::infinity();
  for (long long i = 0; i < count; ++i) {
    const auto word =
        ed ? cb.Codeword(zn_index, i, 0, j)
           : cb.Codeword(0, i / cb.virtual_messages(),
                         i % cb.virtual_messages(), j);
    double lw = 0.0;
    for (int t = 0; t < n && std::isfinite(lw); ++t) {
      const double p =
          ed ? model.p_x_given_zv[(zn[t] * model.nv + word[t]) * model.nx +
                                  xn[t]]
             : model.p_x_given_v[word[t] * model.nx + xn[t]];
      lw += p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }
    log_w[i] = lw;
    top = std::max(top, lw);
  }
  EncodeResult result;
  result.posterior.resize(count);
  if (!std::isfinite(top)) {
    result.fallback = true;
    std::fill(result.posterior.begin(), result.posterior.end(),
              1.0 / static_cast<double>(count));
  } else {
    double total = 0.0;
    for (long long i = 0; i < count; ++i) {
      result.posterior[i] = std::exp(log_w[i] - top);
      total += result.posterior[i];
    }
    for (double& p : result.posterior) p /= total;
  }
  if (rng != nullptr) result.index = rng->Discrete(result.posterior);
  return result;
}

bool JointlyTypical(const SchemeModel& model, std::span<const std::uint16_t> vn,
                    std::span<const int> zn, double eps_typ) {
  std::vector<int> counts(model.p_vz.size(), 0);
  for (std::size_t t = 0; t < vn.size(); ++t) {
    ++counts[vn[t] * model.nz + zn[t]];
  }
  const double n = static_cast<double>(vn.size());
  for (std::size_t cell = 0; cell < counts.size(); ++cell) {
    if (model.p_vz[cell] <= 0.0 && counts[cell] > 0) return false;
    if (std::abs(counts[cell] / n - model.p_vz[cell]) > eps_typ) return false;
  }
  return true;
}

DecodeResult DecodeVirtual(const Codebook& cb, long long m, long long j,
                           std::span<const int> zn, double eps_typ) {
  Require(cb.spec().mode == SchemeMode::kD,
          "virtual-message decoding is a decoder-only operation");
  DecodeResult result;
  // A single virtual index carries no information: nothing to decode.
  if (cb.virtual_messages() == 1) {
    result.typical = JointlyTypical(cb.model(), cb.Codeword(0, m, 0, j), zn,
                                    eps_typ)
                         ? 1
                         : 0;
    return result;
  }
  for (long long mp = 0; mp < cb.virtual_messages(); ++mp) {
    if (JointlyTypical(cb.model(), cb.Codeword(0, m, mp, j), zn, eps_typ)) {
      if (result.typical == 0) result.m_prime = mp;
      ++result.typical;
    }
  }
  result.ok = result.typical == 1;
  if (!result.ok) result.m_prime = 0;
  return result;
}

std::vector<int> SynthesizeOutput(const Codebook& cb,
                                  std::span<const std::uint16_t> codeword,
                                  std::span<const int> zn, CounterRng& rng) {
  const SchemeModel& model = cb.model();
  const std::span<const double> rows(model.channel);
  std::vector<int> yn(codeword.size());
  for (std::size_t t = 0; t < codeword.size(); ++t) {
    yn[t] = rng.Discrete(
        rows.subspan((zn[t] * model.nv + codeword[t]) * model.ny, model.ny));
  }
  return yn;
}

ExperimentReport RunExperiment(const Codebook& cb, long long trials) {
  Require(trials >= 1, "trials must be at least 1");
  const SchemeSpec& spec = cb.spec();
  const SchemeModel& model = cb.model();
  const int n = spec.n;
  const bool ed = spec.mode == SchemeMode::kED;
  const bool joint = spec.realism == Realism::kJoint;
  const bool plugin = model.nx == model.ny;

  ExperimentReport report;
  report.spec_digest = SpecDigest(spec);
  report.n = n;
  report.trials = trials;
  double mean = 0.0, m2 = 0.0;
  long long errors = 0;
  std::unordered_map<std::string, long long> seen;
  std::vector<int> xn(n), zn(n);
  for (long long trial = 0; trial < trials; ++trial) {
    CounterRng rng(spec.seed ^ kTrialKey, static_cast<std::uint64_t>(trial));
    for (int t = 0; t < n; ++t) {
      const int xz = rng.Discrete(model.p_xz);
      xn[t] = xz / model.nz;
      zn[t] = xz % model.nz;
    }
    const long long j = static_cast<long long>(rng.Below(cb.common()));
    const EncodeResult enc = LikelihoodEncode(cb, xn, zn, j, &rng);
    if (enc.fallback) ++report.flagged_trials;
    std::span<const std::uint16_t> word;
    if (ed) {
      word = cb.Codeword(BlockIndex(zn, model.nz), enc.index, 0, j);
    } else {
      const long long m = enc.index / cb.virtual_messages();
      const long long mp = enc.index % cb.virtual_messages();
      const DecodeResult dec = DecodeVirtual(cb, m, j, zn, spec.eps_typ);
      if (!dec.ok || dec.m_prime != mp) ++errors;
      word = cb.Codeword(0, m, dec.m_prime, j);
    }
    const std::vector<int> yn = SynthesizeOutput(cb, word, zn, rng);
    double dist = 0.0;
    for (int t = 0; t < n; ++t) dist += spec.d(xn[t], yn[t]);
    dist /= n;
    const double delta = dist - mean;
    mean += delta / static_cast<double>(trial + 1);
    m2 += delta * (dist - mean);
    if (plugin) {
      std::string key;
      key.reserve(2 * n);
      if (joint) {
        for (int t = 0; t < n; ++t) key.push_back(static_cast<char>(zn[t]));
      }
      for (int t = 0; t < n; ++t) key.push_back(static_cast<char>(yn[t]));
      ++seen[key];
    }
  }
  report.mean_distortion = mean;
  const double var = trials > 1 ? m2 / static_cast<double>(trials - 1) : 0.0;
  report.ci95 = 1.96 * std::sqrt(var / static_cast<double>(trials));
  report.mprime_error_rate =
      ed ? 0.0 : static_cast<double>(errors) / static_cast<double>(trials);
  if (plugin) {
    // Target mass of each observed string; unobserved mass counts in full.
    std::vector<double> p_x(model.nx, 0.0);
    for (int x = 0; x < model.nx; ++x) {
      for (int z = 0; z < model.nz; ++z) p_x[x] += model.p_xz[x * model.nz + z];
    }
    double sum_abs = 0.0, covered = 0.0;
    for (const auto& [key, count] : seen) {
      double target = 1.0;
      for (int t = 0; t < n; ++t) {
        const int y = static_cast<unsigned char>(key[joint ? n + t : t]);
        target *= joint ? model.p_xz[y * model.nz +
                                     static_cast<unsigned char>(key[t])]
                        : p_x[y];
      }
      covered += target;
      sum_abs += std::abs(static_cast<double>(count) / trials - target);
    }
    report.tv_plugin = 0.5 * (sum_abs + std::max(0.0, 1.0 - covered));
  }
  return report;
}

Json ToJson(const ExperimentReport& r) {
  Json j;
  j["spec_digest"] = r.spec_digest;
  j["n"] = r.n;
  j["trials"] = r.trials;
  j["mean_distortion"] = ReportNumber(r.mean_distortion);
  j["ci95"] = ReportNumber(r.ci95);
  j["mprime_error_rate"] = ReportNumber(r.mprime_error_rate);
  if (r.tv_exact.has_value()) j["tv_exact"] = ReportNumber(*r.tv_exact);
  if (r.tv_plugin.has_value()) j["tv_plugin"] = ReportNumber(*r.tv_plugin);
  j["flagged_trials"] = r.flagged_trials;
  return j;
}

}  // namespace rdplab
