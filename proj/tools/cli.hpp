// Command-line front end: `run`, `eval` and `gen`, callable in-process so the
// tests can drive it without spawning the binary.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deeprare::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace deeprare::cli
