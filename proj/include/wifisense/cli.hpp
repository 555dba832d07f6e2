#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wifisense::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kModelMismatch = 4 };

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wifisense::cli
