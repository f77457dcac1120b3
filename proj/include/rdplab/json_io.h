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

#ifndef RDPLAB_JSON_IO_H_
#define RDPLAB_JSON_IO_H_

// JSON (de)serialization for the probability types, plus report formatting.
//
// Distribution schema: {"axes": [{"name": str, "size": int}, ...],
//                       "data": [row-major reals]}.
// A Kernel is stored as a two-axis table ("in", "out") whose rows are the
// conditional pmfs; a DistortionMatrix as a two-axis table ("x", "y").

#include <string>

#include "json.hpp"
#include "rdplab/probability.h"

namespace rdplab {

using Json = nlohmann::ordered_json;

Json ToJson(const JointPmf& p);
Json ToJson(const Pmf& p, const std::string& name = "x");
Json ToJson(const Kernel& k);
Json ToJson(const DistortionMatrix& d);

// Schema violations throw ErrorCode::kSchema; invalid distributions throw
// ErrorCode::kInvalidArgument.
JointPmf JointPmfFromJson(const Json& j);
Pmf PmfFromJson(const Json& j);
Kernel KernelFromJson(const Json& j);
DistortionMatrix DistortionFromJson(const Json& j);

Json ReadJsonFile(const std::string& path);
std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& contents);

// Report float: 12 significant digits; "inf"/"-inf"/"nan" for non-finite.
std::string FormatReal(double v);
// JSON number rounded to 12 significant digits (non-finite -> string).
Json ReportNumber(double v);
// Parses a real that may be spelled "inf" / "infinity".
double ParseReal(const std::string& text);

}  // namespace rdplab

#endif  // RDPLAB_JSON_IO_H_
