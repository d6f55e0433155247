#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcci {

// Exit codes: 0 success, 1 runtime error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Parses argv (program name first) and runs the selected subcommand.
// Results go to --out or `out`; diagnostics go to `err`.
int parse_and_dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace dcci
