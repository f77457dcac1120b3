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

#include "rdplab/cli.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rdplab/coding_sim.h"
#include "rdplab/gaussian.h"
#include "rdplab/json_io.h"
#include "rdplab/probability.h"
#include "rdplab/regions.h"
#include "rdplab/upgrader.h"

namespace rdplab::cli {
namespace {

std::string Trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> Split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = Trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

double ParseNumber(const std::string& text) {
  try {
    return ParseReal(text);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    Fail(ErrorCode::kSchema, "not a number: '" + text + "'");
  }
}

// "a:b:step" grids or comma-separated lists (which may include "inf").
std::vector<double> ParseValues(const std::string& text) {
  const std::vector<std::string> grid = Split(text, ':');
  if (grid.size() == 3) {
    const double lo = ParseNumber(grid[0]);
    const double hi = ParseNumber(grid[1]);
    const double step = ParseNumber(grid[2]);
    if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi)) {
      Fail(ErrorCode::kSchema, "grid must be lo:hi:step with step > 0");
    }
    std::vector<double> values;
    for (long long i = 0;; ++i) {
      const double v = lo + static_cast<double>(i) * step;
      if (v > hi + 1e-9 * step) break;
      values.push_back(v);
    }
    return values;
  }
  if (text.find(':') != std::string::npos) {
    Fail(ErrorCode::kSchema, "grid must be lo:hi:step");
  }
  std::vector<double> values;
  for (const std::string& item : Split(text, ',')) {
    values.push_back(ParseNumber(item));
  }
  return values;
}

Json ParseJsonText(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchema, what + " is not valid JSON: " + e.what());
  }
}

// Inline JSON, or a path to a JSON file.
Json LoadJson(const std::string& arg, const std::string& what) {
  const std::string text = Trim(arg);
  if (!text.empty() && (text[0] == '{' || text[0] == '[')) {
    return ParseJsonText(text, what);
  }
  return ReadJsonFile(text);
}

// Presets "hamming", "squared-embedded(a0,a1,...)", inline JSON or a file.
DistortionMatrix ParseDistortion(const std::string& arg, int rows, int cols) {
  const std::string text = Trim(arg);
  if (text == "hamming") {
    if (rows != cols) {
      Fail(ErrorCode::kSchema, "hamming needs |X| = |Y|");
    }
    return DistortionMatrix::Hamming(rows);
  }
  const std::string preset = "squared-embedded";
  if (text.rfind(preset, 0) == 0) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos ||
        close < open) {
      Fail(ErrorCode::kSchema, "expected squared-embedded(a0,a1,...)");
    }
    const std::vector<double> points =
        ParseValues(text.substr(open + 1, close - open - 1));
    if (static_cast<int>(points.size()) != rows) {
      Fail(ErrorCode::kSchema, "squared-embedded needs one point per letter");
    }
    return DistortionMatrix::SquaredEmbedded(points);
  }
  DistortionMatrix d = DistortionFromJson(LoadJson(text, "distortion"));
  if (d.rows() != rows || d.cols() != cols) {
    Fail(ErrorCode::kSchema, "distortion matrix has the wrong shape");
  }
  return d;
}

// A one-axis source is read as p(x) with a trivial Z.
JointPmf LoadSource(const std::string& path) {
  const JointPmf p = JointPmfFromJson(LoadJson(path, "source"));
  if (p.rank() == 1) {
    return JointPmf({{"x", p.axes()[0].size}, {"z", 1}},
                    std::vector<double>(p.data().begin(), p.data().end()));
  }
  if (p.rank() != 2) Fail(ErrorCode::kSchema, "p_xz must have 1 or 2 axes");
  return p.Renamed({"x", "z"});
}

void Emit(const std::string& text, const std::string& path,
          std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    WriteTextFile(path, text);
  }
}

std::string CsvRow(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) row += ',';
    row += cells[i];
  }
  return row + "\n";
}

struct RegionArgs {
  std::string pxz;
  std::string query;
  std::string d = "hamming";
  std::string setting = "ed-marginal";
  std::string delta;
  std::string rc = "inf";
  int v_size = 0;
  int restarts = 32;
  int threads = 0;
  long long max_points = OracleConfig{}.max_points;
  bool csv = false;
  bool with_candidate = false;
};

std::vector<RegionQuery> BuildQueries(const RegionArgs& a,
                                      std::uint64_t seed) {
  std::vector<RegionQuery> queries;
  if (!a.query.empty()) {
    RegionQuery q = RegionQueryFromJson(LoadJson(a.query, "query"));
    q.optimizer.seed = seed;
    queries.push_back(std::move(q));
    return queries;
  }
  if (a.pxz.empty()) Fail(ErrorCode::kSchema, "--pxz or --query is required");
  if (a.delta.empty()) Fail(ErrorCode::kSchema, "--delta is required");
  const JointPmf p_xz = LoadSource(a.pxz);
  const int nx = p_xz.axes()[0].size;
  const DistortionMatrix d = ParseDistortion(a.d, nx, nx);
  const Setting setting = Setting::Parse(a.setting);
  for (double rc : ParseValues(a.rc)) {
    for (double delta : ParseValues(a.delta)) {
      OptimizerConfig opt;
      opt.restarts = a.restarts;
      opt.threads = a.threads;
      opt.seed = seed;
      queries.push_back(
          RegionQuery{p_xz, d, setting, delta, rc, a.v_size, opt});
    }
  }
  return queries;
}

std::string RegionOutput(const std::vector<RatePoint>& points, bool csv,
                         bool with_candidate) {
  if (!csv && points.size() == 1) {
    RatePoint p = points[0];
    if (!with_candidate) p.candidate.reset();
    return ToJson(p).dump(2) + "\n";
  }
  std::string text =
      CsvRow({"delta", "r_c", "rate", "setting", "v_size", "restarts",
              "converged"});
  for (const RatePoint& p : points) {
    text += CsvRow({FormatReal(p.delta), FormatReal(p.r_c),
                    FormatReal(p.rate), p.setting, std::to_string(p.v_size),
                    std::to_string(p.restarts),
                    p.converged ? "true" : "false"});
  }
  return text;
}

std::string GaussianCurve(const std::string& grid_text,
                          const std::string& rc_text) {
  const std::vector<double> grid = ParseValues(grid_text);
  std::vector<double> extra;
  for (double rc : ParseValues(rc_text)) {
    if (rc < 0.0) Fail(ErrorCode::kSchema, "r_c must be nonnegative");
    if (rc != 0.0 && !std::isinf(rc)) extra.push_back(rc);
  }
  std::vector<std::string> header = {"delta", "rate_rc0", "rate_rcinf",
                                     "rate_classical"};
  for (double rc : extra) header.push_back("rate_rc=" + FormatReal(rc));
  std::string text = CsvRow(header);
  for (double delta : grid) {
    std::vector<std::string> row = {
        FormatReal(delta), FormatReal(RateNormal(delta, CrRate::Bits(0.0))),
        FormatReal(RateNormal(delta, CrRate::Unbounded())),
        FormatReal(ClassicalGaussianRate(delta))};
    for (double rc : extra) {
      row.push_back(FormatReal(RateNormal(delta, CrRate::Bits(rc))));
    }
    text += CsvRow(row);
  }
  return text;
}

struct SimulateArgs {
  std::string spec;
  long long trials = 10000;
  int select = 1;
  bool exact = false;
  std::string induced;
};

std::string Simulate(const SimulateArgs& a, std::optional<std::uint64_t> seed) {
  if (a.spec.empty()) Fail(ErrorCode::kSchema, "--spec is required");
  Json spec_json = LoadJson(a.spec, "scheme spec");
  if (seed.has_value() && spec_json.is_object()) spec_json["seed"] = *seed;
  const SchemeSpec spec = SchemeSpecFromJson(spec_json);
  Require(a.select >= 1, "--select must be at least 1");
  std::shared_ptr<const Codebook> cb;
  std::optional<double> tv;
  int index = 0;
  if (a.select > 1) {
    Selection s = SelectCodebook(spec, a.select);
    cb = s.codebook;
    tv = s.analysis.tv_to_target;
    index = s.index;
  } else {
    cb = std::make_shared<Codebook>(spec, CodebookSeed(spec.seed, 0));
  }
  if ((a.exact && !tv.has_value()) || !a.induced.empty()) {
    const ExactAnalysis e =
        AnalyzeExact(*cb, ExactOptions{false, !a.induced.empty()});
    tv = e.tv_to_target;
    if (!a.induced.empty()) {
      WriteTextFile(a.induced, ToJson(*e.induced).dump() + "\n");
    }
  }
  ExperimentReport report = RunExperiment(*cb, a.trials);
  if (a.exact || a.select > 1) report.tv_exact = tv;
  Json j = ToJson(report);
  j["codebook_index"] = index;
  return j.dump(2) + "\n";
}

struct UpgradeArgs {
  std::string code;
  std::string pxz;
  std::string mode = "marginal";
  std::string d = "hamming";
  std::string report;
  std::optional<double> ref_distortion;
  double eps2 = 0.0, eps3 = 0.0, eps4 = 0.0;
};

int UpgradeCommand(const UpgradeArgs& a, const std::string& out_path,
                   std::ostream& out) {
  if (a.code.empty() || a.pxz.empty()) {
    Fail(ErrorCode::kSchema, "--code and --pxz are required");
  }
  const InducedCode code = InducedCodeFromJson(LoadJson(a.code, "code"));
  const JointPmf p_xz = LoadSource(a.pxz);
  Realism mode;
  if (a.mode == "marginal") {
    mode = Realism::kMarginal;
  } else if (a.mode == "joint") {
    mode = Realism::kJoint;
  } else {
    Fail(ErrorCode::kSchema, "--mode must be marginal or joint");
  }
  const DistortionMatrix d =
      ParseDistortion(a.d, code.x_size, code.y_size);
  const std::vector<double> target = ProductTarget(p_xz, code.n, mode);
  const UpgradeOutput result = Upgrade(code, target, mode, d);
  std::optional<ReferenceStats> reference;
  if (a.ref_distortion.has_value()) {
    reference = ReferenceStats{*a.ref_distortion, a.eps2, a.eps3, a.eps4};
  }
  const VerifyReport verify =
      VerifyUpgrade(code, target, mode, result, d, reference);
  Emit(ToJson(result.code).dump() + "\n", out_path, out);
  Json report;
  report["diagnostics"] = ToJson(result.diagnostics);
  report["verification"] = ToJson(verify);
  const std::string text = report.dump(2) + "\n";
  if (a.report.empty()) {
    if (out_path.empty()) {
      out << text;
    } else {
      std::cout << text;
    }
  } else {
    WriteTextFile(a.report, text);
  }
  return verify.ok ? 0 : 1;
}

// Fast in-process invariant checks; one PASS/FAIL line each.
int SelfTest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const std::string& name, const std::function<bool()>& f) {
    bool ok = false;
    try {
      ok = f();
    } catch (const std::exception& e) {
      out << "error in " << name << ": " << e.what() << "\n";
    }
    out << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };
  check("entropy of Bern(1/4)", [] {
    return std::abs(Entropy(Pmf::Bernoulli(0.25)) - 0.811278124459) < 1e-9;
  });
  check("mutual information of BSC(0.11)", [] {
    const JointPmf j({{"x", 2}, {"y", 2}}, {0.445, 0.055, 0.055, 0.445});
    return std::abs(MutualInformation(j) - 0.5) < 1e-3;
  });
  check("product power of Bern(0.3)", [] {
    const JointPmf p = ProductPower(Pmf::Bernoulli(0.3), 2);
    const std::vector<double> want = {0.49, 0.21, 0.21, 0.09};
    for (int i = 0; i < 4; ++i) {
      if (std::abs(p.data()[i] - want[i]) > 1e-12) return false;
    }
    return true;
  });
  check("gaussian 3 dB gap", [] {
    for (double delta = 0.05; delta <= 1.0; delta += 0.05) {
      const double gap = RateNormal(delta, CrRate::Bits(0.0)) -
                         0.5 * std::log2(1.0 / delta);
      if (std::abs(gap - 0.5) > 1e-12) return false;
    }
    return true;
  });
  check("gaussian rho residual", [] {
    for (double delta = 0.05; delta < 1.96; delta += 0.05) {
      for (double rc : {0.0, 0.5, 2.0}) {
        const double rho = SolveRho(delta, CrRate::Bits(rc));
        if (std::abs(RhoResidual(rho, delta, CrRate::Bits(rc))) > 1e-12) {
          return false;
        }
      }
    }
    return true;
  });
  check("auxiliary correlation b(0.75, 0.5)",
        [] { return std::abs(AuxB(0.75, 0.5) - 0.69843) < 1e-5; });
  check("likelihood posterior", [] {
    // p(x|v) rows (0.9, 0.1) and (0.5, 0.5) with p_V = (0.5, 0.5).
    const JointPmf joint({{"x", 2}, {"z", 1}, {"v", 2}, {"y", 2}},
                         {0.45, 0.0, 0.0, 0.25, 0.05, 0.0, 0.0, 0.25});
    const Candidate c = CandidateFromJoint(joint);
    const SchemeSpec spec = MakeSchemeSpec(
        SchemeMode::kD, 1, 1.0, 0.0, 0.0, c, DistortionMatrix::Hamming(2));
    const Codebook cb(spec, 0);
    const auto w0 = cb.Codeword(0, 0, 0, 0);
    const auto w1 = cb.Codeword(0, 1, 0, 0);
    if (w0[0] == w1[0]) return true;  // degenerate draw: nothing to check
    const EncodeResult e =
        LikelihoodEncode(cb, std::vector<int>{0}, std::vector<int>{0}, 0,
                         nullptr);
    const double p0 = w0[0] == 0 ? 9.0 / 14.0 : 5.0 / 14.0;
    return std::abs(e.posterior[0] - p0) < 1e-12;
  });
  check("upgrade reaches the target exactly", [] {
    // n = 1, trivial Z, uniform binary W, P_Y = Bern(0.4).
    const JointPmf joint({{"xn", 2}, {"zn", 1}, {"m", 2}, {"yn", 2}},
                         {0.28, 0.12, 0.05, 0.05, 0.07, 0.03, 0.2, 0.2});
    const InducedCode code{joint, 1, 2, 1, 2, "test"};
    const std::vector<double> target = {0.5, 0.5};
    const UpgradeOutput u = Upgrade(code, target, Realism::kMarginal,
                                    DistortionMatrix::Hamming(2));
    const VerifyReport r = VerifyUpgrade(code, target, Realism::kMarginal, u,
                                         DistortionMatrix::Hamming(2));
    return r.ok && u.diagnostics.tv_p_pprime <= 0.1 + 1e-12;
  });
  check("exact analysis coupling bound", [] {
    const JointPmf joint({{"x", 2}, {"z", 2}, {"v", 2}, {"y", 2}},
                         {0.3375, 0.0, 0.0, 0.0375, 0.0125, 0.0, 0.0, 0.1125,
                          0.1125, 0.0, 0.0, 0.0125, 0.0375, 0.0, 0.0, 0.3375});
    const Candidate c = CandidateFromJoint(joint);
    const SchemeSpec spec =
        MakeSchemeSpec(SchemeMode::kED, 3, 0.5, 0.0, 0.05, c,
                       DistortionMatrix::Hamming(2));
    const Codebook cb(spec, CodebookSeed(0, 0));
    const ExactAnalysis e = AnalyzeExact(cb);
    return e.tv_p1_q1.has_value() &&
           std::abs(*e.p1_distortion - e.q_distortion) <= *e.tv_p1_q1 + 1e-12;
  });
  out << (failures == 0 ? "selftest passed" : "selftest failed") << "\n";
  return failures == 0 ? 0 : 1;
}

void PrintError(std::ostream& err, const std::string& code,
                const std::string& message) {
  Json j;
  j["error"]["code"] = code;
  j["error"]["message"] = message;
  err << j.dump() << "\n";
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchema: return 2;
    case ErrorCode::kInfeasible: return 3;
    case ErrorCode::kCapExceeded: return 4;
    case ErrorCode::kIo: return 5;
    default: return 1;
  }
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Rate-distortion-perception laboratory"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::optional<std::uint64_t> cap;
  app.add_option("--seed", seed, "random seed (default 0)");
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_option("--cap", cap, "enumeration cap (overrides RDPLAB_CAP)");

  RegionArgs region_args;
  auto add_region_options = [&](CLI::App* sub) {
    sub->add_option("--pxz", region_args.pxz, "source p(x,z) JSON file");
    sub->add_option("--query", region_args.query, "RegionQuery JSON");
    sub->add_option("--d", region_args.d,
                    "hamming | squared-embedded(a,...) | JSON");
    sub->add_option("--setting", region_args.setting,
                    "ed-marginal | ed-joint | d-marginal | d-joint | none");
    sub->add_option("--delta", region_args.delta, "value, list or lo:hi:step");
    sub->add_option("--rc", region_args.rc, "value or list; 'inf' allowed");
    sub->add_option("--v-size", region_args.v_size, "auxiliary alphabet size");
    sub->add_flag("--csv", region_args.csv, "emit CSV even for one point");
    sub->add_flag("--candidate", region_args.with_candidate,
                  "include the optimizing candidate");
  };
  CLI::App* region = app.add_subcommand("region", "optimize the region");
  add_region_options(region);
  region->add_option("--restarts", region_args.restarts, "random restarts");
  region->add_option("--threads", region_args.threads, "worker threads");
  CLI::App* oracle = app.add_subcommand("oracle", "brute-force oracle");
  add_region_options(oracle);
  oracle->add_option("--max-points", region_args.max_points,
                     "encoder mesh budget");

  std::string grid = "0.05:1.95:0.05";
  std::string gauss_rc = "0,inf";
  CLI::App* gauss =
      app.add_subcommand("gaussian-curve", "Gaussian closed-form sweep");
  gauss->add_option("--grid", grid, "delta grid lo:hi:step or list");
  gauss->add_option("--rc", gauss_rc, "common-randomness rates");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "run a coding scheme");
  simulate->add_option("--spec", sim_args.spec, "scheme spec JSON");
  simulate->add_option("--trials", sim_args.trials, "number of trials");
  simulate->add_option("--select", sim_args.select,
                       "best of k codebooks by exact TV");
  simulate->add_flag("--exact", sim_args.exact, "report exact TV");
  simulate->add_option("--induced", sim_args.induced,
                       "write the induced code JSON here");

  UpgradeArgs up_args;
  CLI::App* upgrade =
      app.add_subcommand("upgrade", "perfect-realism decoder upgrade");
  upgrade->add_option("--code", up_args.code, "induced code JSON");
  upgrade->add_option("--pxz", up_args.pxz, "source p(x,z) JSON");
  upgrade->add_option("--mode", up_args.mode, "marginal | joint");
  upgrade->add_option("--d", up_args.d, "distortion");
  upgrade->add_option("--report", up_args.report, "verification report file");
  upgrade->add_option("--ref-distortion", up_args.ref_distortion,
                      "reference E_Q[d]");
  upgrade->add_option("--eps2", up_args.eps2, "TV budget");
  upgrade->add_option("--eps3", up_args.eps3, "TV budget");
  upgrade->add_option("--eps4", up_args.eps4, "TV budget");

  CLI::App* selftest = app.add_subcommand("selftest", "quick invariant suite");

  std::vector<std::string> argv_store = {"rdplab"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cap.has_value()) SetEnumerationCap(*cap);
    const std::uint64_t s = seed.value_or(0);
    if (region->parsed()) {
      std::vector<RatePoint> points;
      for (const RegionQuery& q : BuildQueries(region_args, s)) {
        points.push_back(MinRate(q));
      }
      Emit(RegionOutput(points, region_args.csv, region_args.with_candidate),
           out_path, out);
    } else if (oracle->parsed()) {
      OracleConfig config;
      config.max_points = region_args.max_points;
      std::vector<RatePoint> points;
      for (const RegionQuery& q : BuildQueries(region_args, s)) {
        points.push_back(BruteForceMinRate(q, config));
      }
      Emit(RegionOutput(points, region_args.csv, region_args.with_candidate),
           out_path, out);
    } else if (gauss->parsed()) {
      Emit(GaussianCurve(grid, gauss_rc), out_path, out);
    } else if (simulate->parsed()) {
      Emit(Simulate(sim_args, seed), out_path, out);
    } else if (upgrade->parsed()) {
      return UpgradeCommand(up_args, out_path, out);
    } else if (selftest->parsed()) {
      return SelfTest(out);
    }
  } catch (const Error& e) {
    PrintError(err, ErrorCodeName(e.code()), e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    PrintError(err, "internal", e.what());
    return 1;
  }
  return 0;
}

int Run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return Run(args, std::cout, std::cerr);
}

}  // namespace rdplab::cli
