#pragma once

#include <string>
#include <vector>

namespace robustmargin {

/// Exit codes shared by every subcommand.
enum ExitCode {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitInfeasible = 2,
  kExitDivergence = 3,
  kExitIo = 4,
};

/// Entry point behind the `robust-margin` binary; exposed so tests can drive
/// subcommands in-process. args excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace robustmargin
