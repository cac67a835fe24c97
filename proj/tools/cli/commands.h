// Copyright 2026 The crgame Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The simulate, equilibrium and report subcommands.

#ifndef CRGAME_TOOLS_CLI_COMMANDS_H_
#define CRGAME_TOOLS_CLI_COMMANDS_H_

#include <iosfwd>
#include <string>

#include "config.h"

namespace crgame::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNonConvergence = 3,
  kExitIo = 4,
};

inline constexpr const char* kArtifactVersion = "0.3.0";

// Shortest decimal string that parses back to exactly `value`.
std::string FormatDouble(double value);

// Runs the experiment and writes replications.csv, summary.json,
// bootstrap.json, curves/, plots/ and manifest.json under out_dir. Files are
// staged in a scratch directory and moved into place only on success.
int CmdSimulate(const RunConfig& config, const std::string& out_dir,
                std::ostream& log);

// Solves the reduced belief-grid game and writes policy, value, diagnostic
// and contraction tables. Returns kExitNonConvergence, after writing, if the
// sweep cap was hit.
int CmdEquilibrium(const RunConfig& config, const std::string& out_dir,
                   std::ostream& log);

// Renders Tables 1-3 from summary.json and bootstrap.json in results_dir to
// `out` and to results_dir/report.md.
int CmdReport(const std::string& results_dir, std::ostream& out,
              std::ostream& log);

// The markdown body of CmdReport.
std::string RenderReport(const nlohmann::json& summary,
                         const nlohmann::json& bootstrap);

}  // namespace crgame::cli

#endif  // CRGAME_TOOLS_CLI_COMMANDS_H_
