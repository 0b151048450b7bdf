#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace conley::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kNumericalFailure = 3,
  kCampaignFailure = 4,
};

// Runs one command line (args excludes the program name). Reports go to
// `out`, diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conley::cli
