#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace racediag {

enum ExitCode : int { kExitOk = 0, kExitInputError = 2, kExitCapExceeded = 3 };

/// Runs one command line (without the program name) and returns the exit
/// status. Reports go to `out` unless --out names a file.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace racediag
