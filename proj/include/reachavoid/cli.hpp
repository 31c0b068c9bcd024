#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reachavoid::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kSolverError = 3,
  kSizeGuard = 4,
};

/// Runs one command line (without the program name) and returns the exit
/// code. Subcommands: kind, intercept, match, simulate, reduce3dm, bench.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace reachavoid::cli
