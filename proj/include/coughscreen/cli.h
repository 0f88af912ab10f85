// Copyright 2026 The CoughScreen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry points: extract, cv, train, predict, eval.

#ifndef COUGHSCREEN_CLI_H_
#define COUGHSCREEN_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "coughscreen/error.h"

namespace coughscreen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitTraining = 4;

int ExitCodeFor(ErrorKind kind);

// Parses `args` (without the program name) and runs one subcommand.
// Payloads go to files; `out` receives eval results and help text, `err`
// diagnostics.
int RunCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "0-9", "0,3,5", "7" or a mix such as "0-2,8". Throws Error(kUsage).
std::vector<std::uint64_t> ParseSeedList(const std::string& text);

}  // namespace coughscreen::cli

#endif  // COUGHSCREEN_CLI_H_
