#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nqprobe {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitVerification = 3,
};

// args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nqprobe
