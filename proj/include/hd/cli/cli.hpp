#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hd::cli {

/// Process exit codes.
enum ExitCode : int {
    exit_ok = 0,
    /// Domain, I/O or format error.
    exit_runtime = 1,
    /// Bad flags or configuration.
    exit_usage = 2,
};

/// Runs one hdtool command. `args` excludes the program name. Results go to
/// `out` (JSON unless --pretty), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hd::cli
