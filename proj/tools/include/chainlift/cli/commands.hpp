#pragma once

#include <string>
#include <vector>

namespace chainlift::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Parses argv, runs one subcommand and returns the process exit code:
/// 0 success, 1 invalid input, 2 numerical failure.
int run_command(const std::vector<std::string>& argv);

}  // namespace chainlift::cli
