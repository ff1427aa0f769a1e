// Copyright 2026 The caia Authors.
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

#ifndef CAIA_TOOLS_CLI_H_
#define CAIA_TOOLS_CLI_H_

#include <string>
#include <vector>

namespace caia::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kEmptyAttackSet = 3,
  kOracleFailure = 4,
};

// Entry point of the `caia` tool. args[0] is the program name.
int Run(const std::vector<std::string>& args);

}  // namespace caia::cli

#endif  // CAIA_TOOLS_CLI_H_
