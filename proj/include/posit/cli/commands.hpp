#pragma once

#include <ostream>

namespace posit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the posit_cli tool: table, convert, quantize, stats, train,
/// eval and hw-verify subcommands. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace posit::cli
