#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ccbox {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Run the command line `args` (without the program name). Returns the
/// process exit code: 0 success, 2 usage or configuration error, 1 runtime
/// failure.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Parse an angle such as "10deg", "0.2rad" or "10" (degrees) into radians.
/// Throws ParameterError.
double parse_angle(const std::string &text);

}  // namespace ccbox
