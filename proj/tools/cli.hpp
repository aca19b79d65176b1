#pragma once

#include <iosfwd>

namespace haarlab::cli {

enum ExitCode : int { kPass = 0, kUsage = 2, kNoConvergence = 3, kFailure = 4 };

/// Runs one subcommand. Reports go to `out` unless an output path is
/// given; diagnostics and witnesses go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace haarlab::cli
