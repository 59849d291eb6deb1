#pragma once

#include <ostream>
#include <span>
#include <string>

namespace locreward::cli {

/// Exit codes of `run`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;  // I/O or schema error
inline constexpr int kExitUsage = 2;  // bad command line

/// Environment variable consulted for the default of --jobs.
inline constexpr const char* kJobsEnv = "LOCREWARD_JOBS";

/// Entry point behind the `locreward` binary. `args` excludes argv[0].
/// Subcommands: score, mask2box, analyze, simulate.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace locreward::cli
