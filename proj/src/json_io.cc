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

#include "rdplab/json_io.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "rdplab/error.h"

namespace rdplab {
namespace {

[[noreturn]] void SchemaError(const std::string& what) {
  Fail(ErrorCode::kSchema, "schema: " + what);
}

struct Table {
  std::vector<Axis> axes;
  std::vector<double> data;
};

Table ParseTable(const Json& j) {
  if (!j.is_object()) SchemaError("expected an object");
  if (!j.contains("axes") || !j["axes"].is_array()) {
    SchemaError("missing 'axes' array");
  }
  if (!j.contains("data") || !j["data"].is_array()) {
    SchemaError("missing 'data' array");
  }
  Table t;
  for (const auto& a : j["axes"]) {
    if (!a.is_object() || !a.contains("name") || !a["name"].is_string() ||
        !a.contains("size") || !a["size"].is_number_integer()) {
      SchemaError("each axis needs a string 'name' and an integer 'size'");
    }
    const auto size = a["size"].get<long long>();
    if (size <= 0 || size > std::numeric_limits<int>::max()) {
      SchemaError("axis size must be a positive integer");
    }
    t.axes.push_back({a["name"].get<std::string>(), static_cast<int>(size)});
  }
  for (const auto& v : j["data"]) {
    if (!v.is_number()) SchemaError("'data' entries must be numbers");
    t.data.push_back(v.get<double>());
  }
  return t;
}

Json AxesJson(const std::vector<Axis>& axes) {
  Json out = Json::array();
  for (const auto& a : axes) out.push_back({{"name", a.name}, {"size", a.size}});
  return out;
}

}  // namespace

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kCapExceeded: return "cap-exceeded";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kNumerical: return "numerical";
  }
  return "unknown";
}

Json ToJson(const JointPmf& p) {
  return {{"axes", AxesJson(p.axes())},
          {"data", std::vector<double>(p.data().begin(), p.data().end())}};
}

Json ToJson(const Pmf& p, const std::string& name) {
  return ToJson(JointPmf::FromPmf(p, name));
}

Json ToJson(const Kernel& k) {
  return {{"axes", AxesJson({{"in", k.input_size()}, {"out", k.output_size()}})},
          {"data", std::vector<double>(k.data().begin(), k.data().end())}};
}

Json ToJson(const DistortionMatrix& d) {
  return {{"axes", AxesJson({{"x", d.rows()}, {"y", d.cols()}})},
          {"data", std::vector<double>(d.data().begin(), d.data().end())}};
}

JointPmf JointPmfFromJson(const Json& j) {
  Table t = ParseTable(j);
  if (t.axes.empty()) SchemaError("at least one axis is required");
  double states = 1.0;
  for (const auto& a : t.axes) states *= a.size;
  if (states != static_cast<double>(t.data.size())) {
    SchemaError("'data' length does not match the axes");
  }
  return JointPmf(std::move(t.axes), std::move(t.data));
}

Pmf PmfFromJson(const Json& j) {
  if (j.is_array()) {
    std::vector<double> probs;
    for (const auto& v : j) {
      if (!v.is_number()) SchemaError("pmf entries must be numbers");
      probs.push_back(v.get<double>());
    }
    return Pmf(std::move(probs));
  }
  const JointPmf p = JointPmfFromJson(j);
  if (p.rank() != 1) SchemaError("a pmf has exactly one axis");
  return p.ToPmf();
}

Kernel KernelFromJson(const Json& j) {
  Table t = ParseTable(j);
  if (t.axes.size() != 2) SchemaError("a kernel has exactly two axes");
  if (t.data.size() !=
      static_cast<std::size_t>(t.axes[0].size) * t.axes[1].size) {
    SchemaError("'data' length does not match the axes");
  }
  return Kernel(t.axes[0].size, t.axes[1].size, std::move(t.data));
}

DistortionMatrix DistortionFromJson(const Json& j) {
  if (j.is_array()) {
    // Nested rows: [[d00, d01], [d10, d11]].
    std::vector<double> flat;
    int cols = -1;
    for (const auto& row : j) {
      if (!row.is_array()) SchemaError("distortion rows must be arrays");
      if (cols >= 0 && static_cast<int>(row.size()) != cols) {
        SchemaError("ragged distortion rows");
      }
      cols = static_cast<int>(row.size());
      for (const auto& v : row) {
        if (!v.is_number()) SchemaError("distortion entries must be numbers");
        flat.push_back(v.get<double>());
      }
    }
    if (cols <= 0) SchemaError("empty distortion matrix");
    return DistortionMatrix(static_cast<int>(j.size()), cols, std::move(flat));
  }
  Table t = ParseTable(j);
  if (t.axes.size() != 2) SchemaError("a distortion matrix has two axes");
  if (t.data.size() !=
      static_cast<std::size_t>(t.axes[0].size) * t.axes[1].size) {
    SchemaError("'data' length does not match the axes");
  }
  return DistortionMatrix(t.axes[0].size, t.axes[1].size, std::move(t.data));
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json ReadJsonFile(const std::string& path) {
  const std::string text = ReadTextFile(path);
  Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) SchemaError("'" + path + "' is not valid JSON");
  return j;
}

void WriteTextFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << contents;
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

std::string FormatReal(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Json ReportNumber(double v) {
  if (!std::isfinite(v)) return FormatReal(v);
  return std::strtod(FormatReal(v).c_str(), nullptr);
}

double ParseReal(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "Inf" || text == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    Fail(ErrorCode::kInvalidArgument, "cannot parse '" + text + "' as a real");
  }
  return v;
}

}  // namespace rdplab
