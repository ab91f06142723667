#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace htsentinel::cli {

// Runs one CLI invocation. args excludes the program name. Machine-readable
// JSON goes to out, human-readable summaries to err. Returns the process
// exit code: 0 success, 1 usage/config, 2 input data, 3 numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace htsentinel::cli
