#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dlcf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCheckpoint = 3;
inline constexpr int kExitInput = 4;

// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dlcf::cli
