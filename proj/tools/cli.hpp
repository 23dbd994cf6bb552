#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace llmda::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kDependencyError = 3,
  kBackendFailure = 4,
  kDataError = 5,
};

/// Runs one command line (without the program name). The last line written to
/// `out` is a JSON object listing the artifact paths.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace llmda::cli
