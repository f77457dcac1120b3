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

// Exact enumeration of the laws induced by a fixed codebook.

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "rdplab/coding_sim.h"
#include "rdplab/error.h"

namespace rdplab {
namespace {

long long IntPow(int base, int n) {
  long long v = 1;
  for (int t = 0; t < n; ++t) v *= base;
  return v;
}

bool WithinCap(double states) {
  return states <= static_cast<double>(EnumerationCap());
}

// Adds weight * prod_t rows[t][a * nb + b] to out[base + A * astride +
// B * bstride], where (a_t) and (b_t) are letter strings with block indices
// A and B. Zero entries prune the recursion, so sparse rows stay cheap.
class Expander {
 public:
  Expander(int na, int nb, long long astride, long long bstride, double* out)
      : na_(na), nb_(nb), astride_(astride), bstride_(bstride), out_(out) {}

  void Run(const std::vector<const double*>& rows, long long base,
           double weight) {
    rows_ = &rows;
    base_ = base;
    Visit(0, 0, 0, weight);
  }

 private:
  void Visit(std::size_t t, long long a_index, long long b_index, double w) {
    if (t == rows_->size()) {
      out_[base_ + a_index * astride_ + b_index * bstride_] += w;
      return;
    }
    const double* row = (*rows_)[t];
    for (int a = 0; a < na_; ++a) {
      for (int b = 0; b < nb_; ++b) {
        const double p = row[a * nb_ + b];
        if (p > 0.0) {
          Visit(t + 1, a_index * na_ + a, b_index * nb_ + b, w * p);
        }
      }
    }
  }

  int na_, nb_;
  long long astride_, bstride_;
  double* out_;
  const std::vector<const double*>* rows_ = nullptr;
  long long base_ = 0;
};

struct Context {
  const Codebook& cb;
  const SchemeModel& m;
  int n;
  bool ed;
  long long xn, zn, yn, M, Mp, J;
  std::vector<double> d_xzv;  // E[d(x, Y)] with Y ~ c(. | z, v)
  std::vector<long long> decode;  // D mode: (m * J + j) * Zn + z^n -> m'

  explicit Context(const Codebook& codebook)
      : cb(codebook),
        m(codebook.model()),
        n(codebook.n()),
        ed(codebook.spec().mode == SchemeMode::kED),
        xn(IntPow(m.nx, n)),
        zn(IntPow(m.nz, n)),
        yn(IntPow(m.ny, n)),
        M(codebook.messages()),
        Mp(codebook.virtual_messages()),
        J(codebook.common()) {
    const DistortionMatrix& d = codebook.spec().d;
    d_xzv.assign(static_cast<std::size_t>(m.nx) * m.nz * m.nv, 0.0);
    for (int x = 0; x < m.nx; ++x) {
      for (int z = 0; z < m.nz; ++z) {
        for (int v = 0; v < m.nv; ++v) {
          double acc = 0.0;
          for (int y = 0; y < m.ny; ++y) {
            acc += m.channel[(z * m.nv + v) * m.ny + y] * d(x, y);
          }
          d_xzv[(x * m.nz + z) * m.nv + v] = acc;
        }
      }
    }
  }

  double ZProb(const std::vector<int>& z) const {
    std::vector<double> p_z(m.nz, 0.0);
    for (int x = 0; x < m.nx; ++x) {
      for (int zz = 0; zz < m.nz; ++zz) p_z[zz] += m.p_xz[x * m.nz + zz];
    }
    double p = 1.0;
    for (int t = 0; t < n; ++t) p *= p_z[z[t]];
    return p;
  }

  void BuildDecodeTable() {
    if (ed || !decode.empty()) return;
    CheckCap(static_cast<double>(M) * J * zn, "virtual decoding table");
    decode.resize(static_cast<std::size_t>(M * J * zn));
    for (long long zi = 0; zi < zn; ++zi) {
      const std::vector<int> z = BlockLetters(zi, n, m.nz);
      for (long long mm = 0; mm < M; ++mm) {
        for (long long j = 0; j < J; ++j) {
          decode[(mm * J + j) * zn + zi] =
              DecodeVirtual(cb, mm, j, z, cb.spec().eps_typ).m_prime;
        }
      }
    }
  }

  // Codeword the decoder feeds to the channel for message m.
  std::span<const std::uint16_t> Used(long long zi, long long mm,
                                      long long j) const {
    if (ed) return cb.Codeword(zi, mm, 0, j);
    return cb.Codeword(0, mm, decode[(mm * J + j) * zn + zi], j);
  }
};

}  // namespace

ExactAnalysis AnalyzeExact(const Codebook& cb, const ExactOptions& options) {
  Context ctx(cb);
  const SchemeModel& m = ctx.m;
  const int n = ctx.n;
  const bool joint = cb.spec().realism == Realism::kJoint;
  Require(m.nx == m.ny, "realism analysis needs |Y| = |X|");
  const double table = joint ? static_cast<double>(ctx.zn) * ctx.yn
                             : static_cast<double>(ctx.yn);
  CheckCap(table, "exact output table");
  if (ctx.ed) CheckCap(static_cast<double>(ctx.zn), "side-information strings");

  ExactAnalysis result;
  result.output.assign(static_cast<std::size_t>(table), 0.0);
  std::vector<const double*> rows(n);

  // Output law under Q1 and the distortion of the idealized-source law.
  if (ctx.ed) {
    Expander expand(1, m.ny, 0, 1, result.output.data());
    for (long long zi = 0; zi < ctx.zn; ++zi) {
      const std::vector<int> z = BlockLetters(zi, n, m.nz);
      const double pz = ctx.ZProb(z);
      if (pz <= 0.0) continue;
      const double w = pz / static_cast<double>(ctx.M * ctx.J);
      for (long long mm = 0; mm < ctx.M; ++mm) {
        for (long long j = 0; j < ctx.J; ++j) {
          const auto word = cb.Codeword(zi, mm, 0, j);
          double dist = 0.0;
          for (int t = 0; t < n; ++t) {
            const int zv = z[t] * m.nv + word[t];
            rows[t] = &m.channel[static_cast<std::size_t>(zv) * m.ny];
            for (int x = 0; x < m.nx; ++x) {
              dist += m.p_x_given_zv[zv * m.nx + x] *
                      ctx.d_xzv[(x * m.nz + z[t]) * m.nv + word[t]];
            }
          }
          result.q_distortion += w * dist / n;
          expand.Run(rows, joint ? zi * ctx.yn : 0, w);
        }
      }
    }
  } else {
    // Per-letter output law given v: q(y | v), or p(z | v) c(y | z, v).
    const int na = joint ? m.nz : 1;
    std::vector<double> letter(static_cast<std::size_t>(m.nv) * na * m.ny,
                               0.0);
    for (int v = 0; v < m.nv; ++v) {
      for (int z = 0; z < m.nz; ++z) {
        for (int y = 0; y < m.ny; ++y) {
          const double p = m.p_z_given_v[v * m.nz + z] *
                           m.channel[(z * m.nv + v) * m.ny + y];
          letter[(static_cast<std::size_t>(v) * na + (joint ? z : 0)) * m.ny +
                 y] += p;
        }
      }
    }
    Expander expand(na, m.ny, joint ? ctx.yn : 0, 1, result.output.data());
    const double w = 1.0 / static_cast<double>(ctx.M * ctx.Mp * ctx.J);
    for (long long mm = 0; mm < ctx.M; ++mm) {
      for (long long mp = 0; mp < ctx.Mp; ++mp) {
        for (long long j = 0; j < ctx.J; ++j) {
          const auto word = cb.Codeword(0, mm, mp, j);
          for (int t = 0; t < n; ++t) {
            rows[t] = &letter[static_cast<std::size_t>(word[t]) * na * m.ny];
          }
          expand.Run(rows, 0, w);
        }
      }
    }
    // Q1 source followed by the virtual decoder.
    CheckCap(static_cast<double>(ctx.zn), "side-information strings");
    ctx.BuildDecodeTable();
    for (long long mm = 0; mm < ctx.M; ++mm) {
      for (long long mp = 0; mp < ctx.Mp; ++mp) {
        for (long long j = 0; j < ctx.J; ++j) {
          const auto word = cb.Codeword(0, mm, mp, j);
          for (long long zi = 0; zi < ctx.zn; ++zi) {
            const std::vector<int> z = BlockLetters(zi, n, m.nz);
            double pz = 1.0;
            for (int t = 0; t < n && pz > 0.0; ++t) {
              pz *= m.p_z_given_v[word[t] * m.nz + z[t]];
            }
            if (pz <= 0.0) continue;
            const auto used = ctx.Used(zi, mm, j);
            double dist = 0.0;
            for (int t = 0; t < n; ++t) {
              const int zv = z[t] * m.nv + word[t];
              for (int x = 0; x < m.nx; ++x) {
                dist += m.p_x_given_zv[zv * m.nx + x] *
                        ctx.d_xzv[(x * m.nz + z[t]) * m.nv + used[t]];
              }
            }
            result.q_distortion += w * pz * dist / n;
          }
        }
      }
    }
  }

  // Product target over y^n or (z^n, y^n).
  {
    std::vector<double> target(result.output.size(), 0.0);
    std::vector<double> letter;
    int na = 1;
    if (joint) {
      na = m.nz;
      letter.assign(static_cast<std::size_t>(m.nz) * m.nx, 0.0);
      for (int x = 0; x < m.nx; ++x) {
        for (int z = 0; z < m.nz; ++z) {
          letter[z * m.nx + x] = m.p_xz[x * m.nz + z];
        }
      }
    } else {
      letter.assign(m.nx, 0.0);
      for (int x = 0; x < m.nx; ++x) {
        for (int z = 0; z < m.nz; ++z) letter[x] += m.p_xz[x * m.nz + z];
      }
    }
    for (int t = 0; t < n; ++t) rows[t] = letter.data();
    Expander expand(na, m.nx, joint ? ctx.yn : 0, 1, target.data());
    expand.Run(rows, 0, 1.0);
    result.tv_to_target = TvDistance(result.output, target);
  }

  if (!options.p1 && !options.induced) return result;
  const double source_states = static_cast<double>(ctx.J) * ctx.xn * ctx.zn;
  if (!WithinCap(source_states)) {
    if (options.induced) CheckCap(source_states, "induced code source");
    return result;
  }
  ctx.BuildDecodeTable();
  const long long xz = ctx.xn * ctx.zn;

  // Q1 and P1 marginals of (J, X^n, Z^n), layout (j * Xn + x^n) * Zn + z^n.
  std::vector<double> q1(static_cast<std::size_t>(source_states), 0.0);
  std::vector<double> p1(q1.size(), 0.0);
  if (ctx.ed) {
    Expander expand(1, m.nx, 0, ctx.zn, q1.data());
    for (long long zi = 0; zi < ctx.zn; ++zi) {
      const std::vector<int> z = BlockLetters(zi, n, m.nz);
      const double pz = ctx.ZProb(z);
      if (pz <= 0.0) continue;
      for (long long j = 0; j < ctx.J; ++j) {
        for (long long mm = 0; mm < ctx.M; ++mm) {
          const auto word = cb.Codeword(zi, mm, 0, j);
          for (int t = 0; t < n; ++t) {
            rows[t] = &m.p_x_given_zv[static_cast<std::size_t>(
                                          z[t] * m.nv + word[t]) *
                                      m.nx];
          }
          expand.Run(rows, j * xz + zi,
                     pz / static_cast<double>(ctx.J * ctx.M));
        }
      }
    }
  } else {
    std::vector<double> letter(static_cast<std::size_t>(m.nv) * m.nx * m.nz);
    for (int v = 0; v < m.nv; ++v) {
      for (int x = 0; x < m.nx; ++x) {
        for (int z = 0; z < m.nz; ++z) {
          letter[(v * m.nx + x) * m.nz + z] =
              m.p_x_given_v[v * m.nx + x] * m.p_z_given_x[x * m.nz + z];
        }
      }
    }
    Expander expand(m.nx, m.nz, ctx.zn, 1, q1.data());
    const double w = 1.0 / static_cast<double>(ctx.J * ctx.M * ctx.Mp);
    for (long long j = 0; j < ctx.J; ++j) {
      for (long long mm = 0; mm < ctx.M; ++mm) {
        for (long long mp = 0; mp < ctx.Mp; ++mp) {
          const auto word = cb.Codeword(0, mm, mp, j);
          for (int t = 0; t < n; ++t) {
            rows[t] =
                &letter[static_cast<std::size_t>(word[t]) * m.nx * m.nz];
          }
          expand.Run(rows, j * xz, w);
        }
      }
    }
  }
  for (long long xi = 0; xi < ctx.xn; ++xi) {
    const std::vector<int> x = BlockLetters(xi, n, m.nx);
    for (long long zi = 0; zi < ctx.zn; ++zi) {
      const std::vector<int> z = BlockLetters(zi, n, m.nz);
      double p = 1.0 / static_cast<double>(ctx.J);
      for (int t = 0; t < n && p > 0.0; ++t) p *= m.p_xz[x[t] * m.nz + z[t]];
      for (long long j = 0; j < ctx.J; ++j) p1[j * xz + xi * ctx.zn + zi] = p;
    }
  }
  result.tv_p1_q1 = TvDistance(p1, q1);

  // P1: true source, likelihood encoder, decoder kernels of the code.
  const double code_states = source_states * ctx.M * ctx.yn;
  const bool induced = options.induced;
  if (induced) CheckCap(code_states, "induced code");
  std::vector<double> code;
  if (induced) code.assign(static_cast<std::size_t>(code_states), 0.0);
  Expander expand_y(1, m.ny, 0, 1, code.data());
  double p1_dist = 0.0;
  std::vector<double> post_m(ctx.M);
  for (long long xi = 0; xi < ctx.xn; ++xi) {
    const std::vector<int> x = BlockLetters(xi, n, m.nx);
    for (long long zi = 0; zi < ctx.zn; ++zi) {
      const std::vector<int> z = BlockLetters(zi, n, m.nz);
      for (long long j = 0; j < ctx.J; ++j) {
        const double p = p1[j * xz + xi * ctx.zn + zi];
        if (p <= 0.0) continue;
        const EncodeResult enc = LikelihoodEncode(cb, x, z, j, nullptr);
        std::fill(post_m.begin(), post_m.end(), 0.0);
        for (std::size_t i = 0; i < enc.posterior.size(); ++i) {
          post_m[static_cast<long long>(i) / ctx.Mp] += enc.posterior[i];
        }
        for (long long mm = 0; mm < ctx.M; ++mm) {
          if (post_m[mm] <= 0.0) continue;
          const auto used = ctx.Used(zi, mm, j);
          double dist = 0.0;
          for (int t = 0; t < n; ++t) {
            dist += ctx.d_xzv[(x[t] * m.nz + z[t]) * m.nv + used[t]];
          }
          p1_dist += p * post_m[mm] * dist / n;
          if (induced) {
            for (int t = 0; t < n; ++t) {
              rows[t] = &m.channel[static_cast<std::size_t>(
                                       z[t] * m.nv + used[t]) *
                                   m.ny];
            }
            const long long base =
                (((xi * ctx.zn + zi) * ctx.J + j) * ctx.M + mm) * ctx.yn;
            expand_y.Run(rows, base, p * post_m[mm]);
          }
        }
      }
    }
  }
  if (options.p1) result.p1_distortion = p1_dist;
  if (induced) {
    InducedCode ic{
        JointPmf({{"xn", static_cast<int>(ctx.xn)},
                  {"zn", static_cast<int>(ctx.zn)},
                  {"j", static_cast<int>(ctx.J)},
                  {"m", static_cast<int>(ctx.M)},
                  {"yn", static_cast<int>(ctx.yn)}},
                 std::move(code)),
        n, m.nx, m.nz, m.ny, "P1-corrected"};
    result.induced = std::move(ic);
  }
  return result;
}

FactorizationCheck CheckFactorization(const InducedCode& code,
                                      const JointPmf& p_xz) {
  Require(p_xz.rank() == 2, "p_xz must have two axes");
  const JointPmf source = code.joint.Marginal({"xn", "zn", "j"});
  const int nx = p_xz.axes()[0].size;
  const int nz = p_xz.axes()[1].size;
  Require(nx == code.x_size && nz == code.z_size,
          "source alphabets do not match the code");
  const long long xn = source.axes()[0].size;
  const long long zn = source.axes()[1].size;
  const long long J = source.axes()[2].size;
  std::vector<double> target(source.size());
  for (long long xi = 0; xi < xn; ++xi) {
    const std::vector<int> x = BlockLetters(xi, code.n, nx);
    for (long long zi = 0; zi < zn; ++zi) {
      const std::vector<int> z = BlockLetters(zi, code.n, nz);
      double p = 1.0 / static_cast<double>(J);
      for (int t = 0; t < code.n; ++t) p *= p_xz.at({x[t], z[t]});
      for (long long j = 0; j < J; ++j) target[(xi * zn + zi) * J + j] = p;
    }
  }
  FactorizationCheck check;
  check.source_tv = TvDistance(source.data(), target);
  check.markov_xy = ConditionalMutualInformation(code.joint, {"xn"}, {"yn"},
                                                 {"zn", "j", "m"});
  check.markov_zm =
      ConditionalMutualInformation(code.joint, {"zn"}, {"m"}, {"xn", "j"});
  return check;
}

double BlockDistortion(const InducedCode& code, const DistortionMatrix& d) {
  Require(d.rows() == code.x_size && d.cols() == code.y_size,
          "distortion shape does not match the code");
  const JointPmf xy = code.joint.Marginal({"xn", "yn"});
  const int xn = xy.axes()[0].size;
  const int yn = xy.axes()[1].size;
  double total = 0.0;
  for (int xi = 0; xi < xn; ++xi) {
    const std::vector<int> x = BlockLetters(xi, code.n, code.x_size);
    for (int yi = 0; yi < yn; ++yi) {
      const double p = xy.data()[static_cast<std::size_t>(xi) * yn + yi];
      if (p <= 0.0) continue;
      const std::vector<int> y = BlockLetters(yi, code.n, code.y_size);
      double dist = 0.0;
      for (int t = 0; t < code.n; ++t) dist += d(x[t], y[t]);
      total += p * dist / code.n;
    }
  }
  return total;
}

Json ToJson(const InducedCode& code) {
  Json j;
  j["provenance"] = code.provenance;
  j["n"] = code.n;
  j["x_size"] = code.x_size;
  j["z_size"] = code.z_size;
  j["y_size"] = code.y_size;
  j["joint"] = ToJson(code.joint);
  return j;
}

InducedCode InducedCodeFromJson(const Json& j) {
  if (!j.is_object() || !j.contains("joint") || !j.contains("n")) {
    Fail(ErrorCode::kSchema, "induced code needs 'n' and 'joint'");
  }
  try {
    JointPmf joint = JointPmfFromJson(j.at("joint"));
    for (const char* axis : {"xn", "zn", "yn"}) {
      if (!joint.HasAxis(axis)) {
        Fail(ErrorCode::kSchema,
             std::string("induced code joint needs axis '") + axis + "'");
      }
    }
    const int n = j.at("n").get<int>();
    auto letter_size = [&](const char* key, const char* axis) {
      if (j.contains(key)) return j.at(key).get<int>();
      // Recover the letter alphabet from the block size.
      const int block = joint.axis(axis).size;
      const int a = static_cast<int>(std::lround(std::pow(block, 1.0 / n)));
      if (IntPow(a, n) != block) {
        Fail(ErrorCode::kSchema, std::string("cannot infer ") + key);
      }
      return a;
    };
    const int nx = letter_size("x_size", "xn");
    const int nz = letter_size("z_size", "zn");
    const int ny = letter_size("y_size", "yn");
    if (IntPow(nx, n) != joint.axis("xn").size ||
        IntPow(nz, n) != joint.axis("zn").size ||
        IntPow(ny, n) != joint.axis("yn").size) {
      Fail(ErrorCode::kSchema, "block axis sizes do not match n");
    }
    return InducedCode{std::move(joint), n, nx, nz, ny,
                       j.value("provenance", std::string("external"))};
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchema, std::string("induced code: ") + e.what());
  }
}

Selection SelectCodebook(const SchemeSpec& spec, int k) {
  Require(k >= 1, "need at least one codebook");
  Selection best;
  for (int i = 0; i < k; ++i) {
    auto cb = std::make_shared<Codebook>(spec, CodebookSeed(spec.seed, i));
    ExactAnalysis a = AnalyzeExact(*cb, ExactOptions{false, false});
    if (!best.codebook || a.tv_to_target < best.analysis.tv_to_target) {
      best.index = i;
      best.codebook = std::move(cb);
      best.analysis = std::move(a);
    }
  }
  return best;
}

}  // namespace rdplab
