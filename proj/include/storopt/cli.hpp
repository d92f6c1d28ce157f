#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace storopt::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kBadInput = 2,
  kInternal = 3,
  kUseMilp = 10,
};

/// Runs the command line; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace storopt::cli
