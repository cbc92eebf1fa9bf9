#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace critjac::cli {

enum ExitCode { kPass = 0, kCheckFailure = 1, kUsageError = 2 };

/// Runs one command line (args excludes the program name). Reports go to out,
/// warnings and errors to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace critjac::cli
