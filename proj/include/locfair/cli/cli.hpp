#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace locfair::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable holding the default output directory.
inline constexpr const char* kOutEnv = "LOCFAIR_OUT";

/// Entry point of the `locfair` executable. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace locfair::cli
