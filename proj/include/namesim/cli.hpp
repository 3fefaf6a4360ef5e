#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace namesim::cli {

/// Runs one subcommand. Diagnostics go to `err`. Returns the process exit
/// code: 0 success, 2 bad arguments, 3 I/O failure, 4 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& err);
int run(int argc, char** argv);

}  // namespace namesim::cli
