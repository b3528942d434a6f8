#pragma once

#include <ostream>

namespace tcsim::app {

/// Exit code for command-line usage errors (unknown flags, missing values).
inline constexpr int usage_exit_code = 2;
/// Exit code for unexpected internal failures.
inline constexpr int internal_exit_code = 1;

/// Runs one `tcsim` command. Results go to `out`; diagnostics go to `err`
/// as `error[<code>]: <message>`. Returns the process exit code: 0 on
/// success, the numeric ErrorCode for library errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tcsim::app
