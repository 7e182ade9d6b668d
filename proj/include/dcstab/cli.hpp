#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcstab {

/// Exit codes shared by every subcommand.
enum ExitCode : int { exit_ok = 0, exit_negative = 1, exit_invalid = 2 };

/// Runs the command line (without the program name). Reports go to `out`, errors to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dcstab
