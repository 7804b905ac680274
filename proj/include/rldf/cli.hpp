#pragma once

#include <iosfwd>

namespace rldf {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitOracle = 3,
  kExitInvariant = 4,
};

/// Entry point of the `rldf` tool. Subcommands: train, sweep, ndg,
/// dump-grammar, decode, replay. Normal output goes to `out`, progress and
/// diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rldf
