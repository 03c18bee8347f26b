#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace advdist {

/// Exit codes: 0 success, 1 failure inside a module, 2 usage error.
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `advdist` tool. Data written to `-` goes to `out`;
/// diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace advdist
