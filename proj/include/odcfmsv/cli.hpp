#pragma once

#include <iosfwd>

namespace odcf {

/// Exit status of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Entry point of the `odcfmsv` tool (commands simulate, fit, predict,
/// backtest, compare, evalcorr). Diagnostics go to `err`, short summaries to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace odcf
