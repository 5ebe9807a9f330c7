#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cfgrid::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kSolver = 4 };

/// Runs one command. args[0] is the program name. Results go to `out`,
/// logs and machine-readable errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace cfgrid::cli
