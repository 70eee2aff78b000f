#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wfv::cli {

enum ExitCode { Success = 0, Violated = 1, Failure = 2, Deadlock = 3 };

/// Runs `wfv <command> ...` with `args` excluding the program name. Documents
/// go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace wfv::cli
