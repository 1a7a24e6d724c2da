#pragma once

// Command-line driver. Exit codes: 0 success, 2 invalid input, 3 numerical
// failure (non-convergence, H <= 0, failed identity suite).

#include <iosfwd>
#include <string>
#include <vector>

namespace willmore::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace willmore::cli
