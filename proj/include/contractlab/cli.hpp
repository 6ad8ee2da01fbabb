#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace contractlab {

// Exit codes of the command-line driver.
enum ExitCode : int { kExitOk = 0, kExitDomain = 2, kExitSolver = 3, kExitUsage = 64 };

// Runs one subcommand; args excludes the program name. The JSON summary goes to out,
// diagnostics and usage text to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

} // namespace contractlab
