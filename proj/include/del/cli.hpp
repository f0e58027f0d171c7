#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace del::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kIo = 3,
};

/// Flat key=value configuration; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> read_config(const std::string& path);

/// Runs the command line `args` (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace del::cli
