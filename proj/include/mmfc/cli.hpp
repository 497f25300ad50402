#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace mmfc::cli {

/// Runs one subcommand. `args` excludes the program name. Returns the process
/// exit code: 0 on success, 2 usage, 3 data, 4 backend.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace mmfc::cli
