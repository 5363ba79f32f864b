#pragma once

#include <iosfwd>

namespace wlasso {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/**
 * Entry point behind the `wlasso` tool. Subcommands: solve, weights,
 * diagnose, experiment, concentration-test. Regular output goes to `out`,
 * messages and usage text to `err`.
 */
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wlasso
