#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace moe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitInfeasible = 4;

/// Runs one `moe` invocation. args excludes the program name. Human-readable
/// output goes to `out`, diagnostics to `err`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace moe::cli
