#pragma once

#include <iosfwd>

namespace finegrid::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kScenarioError = 2, kRuntimeFailure = 3 };

/// Entry point behind the `finegrid` executable: `run`, `sweep` and `snapshot`.
/// Errors go to `err` as a single line: "finegrid: error: <kind>: <message>".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace finegrid::cli
