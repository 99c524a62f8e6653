#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace predcomb::cli {

enum ExitCode { kOk = 0, kUsage = 2, kIo = 3, kNumerical = 4 };

// Runs the `predcomb` command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace predcomb::cli
