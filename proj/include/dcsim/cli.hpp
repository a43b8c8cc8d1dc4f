#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcsim::cli {

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kIoFailure = 2 };

/// Runs the `dcsim` command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dcsim::cli
