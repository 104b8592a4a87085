#pragma once

#include <string>
#include <vector>

namespace riskann::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

/// Entry point behind the `riskann` executable. Subcommands: synth, rais,
/// train, eval, predict, report. Diagnostics go to standard error; results
/// only to the files named on the command line.
int run(int argc, const char* const* argv);

/// Convenience overload; args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace riskann::cli
