#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace confsets {

/// The whole command-line tool behind `main`, exposed so tests can drive it
/// in-process.  `args` excludes the program name.  Returns the process exit
/// code: 0 on success, 2 for invalid arguments or malformed input files,
/// 3 for runtime failures (singular designs, non-convergence, budget
/// exhaustion, I/O write errors).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace confsets
