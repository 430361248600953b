// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dysflux::cli {

/// Process exit codes of the `dysflux` tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,  // the input was read but failed a check
  kExitUsage = 2,       // bad command line
  kExitRuntime = 3,     // any other error raised while running
};

/// Runs one invocation. `args` excludes the program name. Reports go to
/// `out`, log lines and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace dysflux::cli
