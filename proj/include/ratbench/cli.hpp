#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ratbench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInvariantError = 3;

/// Runs one command. `args` excludes the program name. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ratbench
