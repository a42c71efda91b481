#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rdu::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoFeasible = 3;

// Runs the `rdu` command line with args excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdu::cli
