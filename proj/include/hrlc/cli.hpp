#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hrlc::cli {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,    // bad flags, bad config file, parameter out of range
  kExitData = 3,      // missing/malformed inputs, shape mismatches
  kExitInternal = 4,  // anything else
};

inline constexpr const char* kVersion = "0.1.0";

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hrlc::cli
