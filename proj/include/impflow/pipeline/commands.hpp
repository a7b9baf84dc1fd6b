#pragma once

#include <string>
#include <vector>

namespace impflow {

// Parses and executes one CLI invocation (args exclude the program name).
// Returns 0 on success, 2 on usage errors, 1 on runtime failures.
int run_command(const std::vector<std::string>& args);

}  // namespace impflow
