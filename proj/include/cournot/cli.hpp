#pragma once

#include <iosfwd>

namespace cournot::cli {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Parses argv, runs one command and writes its artifact to the configured
/// output (or `out`). Diagnostics go to `err`. Returns an exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cournot::cli
