// Copyright 2026 The MFOML Authors
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

#ifndef MFOML_CLI_H_
#define MFOML_CLI_H_

#include <string>
#include <vector>

#include "mfoml/oml.h"
#include "mfoml/solver.h"

namespace mfoml {

inline constexpr char kVersion[] = "0.1.0";

// Process exit codes.
enum ExitCode : int {
  kExitConverged = 0,
  kExitBudgetExhausted = 2,
  kExitUsage = 64,
  kExitDataError = 65,
};

// Entry point shared by the binary and the tests.
int run_cli(const std::vector<std::string>& args);

// Shortest round-trip text for a double (17 significant digits).
std::string format_double(double v);

// Writes `contents` to `path` via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);

// CSV text for a solve run: iteration,cumulative_runtime_s,exploitability.
std::string solver_csv(const SolverTrace& trace, bool include_timing = true);

// CSV text for a learn run: episode,iteration,expl,expl_regret.
std::string regret_csv(const RegretTrace& trace);

// Per-episode mean and 95% normal-approximation half widths across runs:
// episode,iteration,expl_mean,expl_half_width,expl_regret_mean,
// expl_regret_half_width.
std::string regret_aggregate_csv(const std::vector<RegretTrace>& runs);

}  // namespace mfoml

#endif  // MFOML_CLI_H_
