#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ppto::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 2, kSolver = 3, kIo = 4 };

/// Runs the command line `args` (args[0] is the program name), writing records
/// to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ppto::cli
