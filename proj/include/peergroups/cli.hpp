#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace peergroups::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kDataError = 2,
  kNumericalError = 3,
};

/// Parses argv and runs the selected subcommand (scm, becd, simulate, audit).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace peergroups::cli
