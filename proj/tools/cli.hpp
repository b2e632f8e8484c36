#pragma once

#include <string>
#include <vector>

namespace fdpburst::cli {

enum ExitCode : int { kOk = 0, kIoFailure = 1, kConfigFailure = 2, kSolverFailure = 3 };

/// Entry point of the fdpburst tool. Subcommands: simulate, asymptotics,
/// fit-factor, compare. Returns the process exit code.
int run(int argc, char** argv);

/// Same as run() with the arguments after the program name.
int run(const std::vector<std::string>& args);

}  // namespace fdpburst::cli
