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

#ifndef RDPLAB_ERROR_H_
#define RDPLAB_ERROR_H_

#include <stdexcept>
#include <string>

namespace rdplab {

// Failure categories. The command-line front end maps these onto exit codes.
enum class ErrorCode {
  kInvalidArgument,  // malformed distribution, shape mismatch, bad parameter
  kSchema,           // input file does not parse against the JSON schema
  kInfeasible,       // the requested problem has no feasible point
  kCapExceeded,      // an enumeration would exceed the configured state cap
  kIo,               // file could not be read or written
  kNumerical,        // an iterative method failed to produce a usable value
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace rdplab

#endif  // RDPLAB_ERROR_H_
