#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace klish::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNumeric = 3 };

/// Runs one subcommand. `args` excludes the program name. The single JSON
/// report goes to `out`, progress and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace klish::cli
