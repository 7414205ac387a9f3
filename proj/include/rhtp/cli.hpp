#pragma once

#include <iosfwd>

namespace rhtp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `rhtp` tool. Subcommands: run, preset, analyze, ric,
/// report. Returns 0 on success, 1 on usage or config errors, 2 on runtime
/// errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace rhtp::cli
