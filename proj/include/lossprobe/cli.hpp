#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lossprobe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;  // refuted, inconsistent, or a witness found
inline constexpr int kExitUsage = 2;      // bad arguments, unreadable or malformed input

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lossprobe::cli
