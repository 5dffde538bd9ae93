#pragma once

#include <string>
#include <vector>

namespace cvd {

// Full command-line surface (prep, train, rfe, compare). Returns the process
// exit code: 0 success, 2 usage/validation problems, 3 runtime/training
// failures. `args` excludes the program name.
int cli_main(const std::vector<std::string>& args);

} // namespace cvd
