#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stainnorm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitProcessing = 2;

// Entry point of the `stainnorm` tool; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stainnorm::cli
