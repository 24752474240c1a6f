#pragma once

#include <iosfwd>

namespace qrefine::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // pipeline, backend or I/O failure
inline constexpr int kExitUsage = 2;    // bad flags, config or spec

/// Entry point of the `qrefine` tool: refine, map, degrade and eval
/// subcommands. Normal output goes to `out`, diagnostics and usage text
/// to `err`. Never calls exit().
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qrefine::cli
