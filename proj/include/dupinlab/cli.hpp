#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dupinlab::cli {

// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration
// error, 3 geometric error.
enum ExitCode { kPass = 0, kCheckFailure = 1, kUsage = 2, kGeometric = 3 };

// Runs the command line (args excludes the program name). The report goes to
// --out when given, otherwise to out; diagnostics go to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dupinlab::cli
