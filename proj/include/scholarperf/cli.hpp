#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scholarperf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputeFailure = 1;
inline constexpr int kExitInputFailure = 2;

/// Runs one subcommand (compute, regress, simulate, report). `args` excludes
/// the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace scholarperf::cli
