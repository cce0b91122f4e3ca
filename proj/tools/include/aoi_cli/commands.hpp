#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aoi::cli {

/// Exit statuses shared by every subcommand.
enum ExitStatus : int {
  kOk = 0,          // success, or the checked condition holds
  kDomainFailure = 1,
  kUsageError = 2,
};

/// Runs one command line (args excludes the program name). Reports go to
/// `out` (or the --out file), errors to `err` as {code, message, context}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aoi::cli
