#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mumonoids {

// Exit status for malformed command lines.
inline constexpr int kUsageExit = 64;

// Entry point of the mumonoids command-line tool; `args` excludes the program
// name. Subcommands: check, optimize, run, bench. Returns the process exit status.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mumonoids
