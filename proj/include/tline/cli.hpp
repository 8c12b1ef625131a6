#pragma once

// Command-line front end. Subcommands: synth-loading, simulate, pcm, sobol,
// pfail, mc, converge. Exit 0 on success, 1 on bad input, 2 on solver failure.

#include <string>
#include <vector>

namespace tline {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitSolver = 2;

int run_command(int argc, const char* const* argv);

/// Same as above with argv[0] omitted.
int run_command(const std::vector<std::string>& args);

}  // namespace tline
