#pragma once

#include <iosfwd>

namespace sequnet {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

// Subcommands: train, eval, generate, profile, gradcheck.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sequnet
