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

#ifndef RDPLAB_CLI_H_
#define RDPLAB_CLI_H_

// Batch command-line front end: region, oracle, gaussian-curve, simulate,
// upgrade and selftest subcommands.
//
// Exit codes: 0 success, 1 other failure, 2 schema or usage error,
// 3 infeasible problem, 4 enumeration cap exceeded, 5 I/O failure. Failures
// print {"error": {"code": ..., "message": ...}} on the error stream.

#include <ostream>
#include <string>
#include <vector>

#include "rdplab/error.h"

namespace rdplab::cli {

int ExitCodeFor(ErrorCode code);

// `args` excludes the program name.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);
int Run(int argc, char** argv);

}  // namespace rdplab::cli

#endif  // RDPLAB_CLI_H_
