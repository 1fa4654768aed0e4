#pragma once

#include <iosfwd>

namespace cohortsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitCheckFailed = 2;

/// Entry point of the `cohortsim` tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

} // namespace cohortsim
