#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace epitome::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kInternalError = 3,
};

/// Runs one command line. `args[0]` is the program name. Machine-readable
/// output goes to `out`, progress and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epitome::cli
