#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mmbias::cli {

inline constexpr const char* kToolName = "mmbias";
inline constexpr const char* kToolVersion = "0.1.0";

// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,      // bad usage or configuration
  kExitDataFormat = 2,  // malformed input files
  kExitDegenerate = 3,  // numeric quantity undefined on the data
};

// Entry point shared by the executable and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmbias::cli
