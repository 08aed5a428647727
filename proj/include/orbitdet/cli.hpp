#pragma once

#include <string>
#include <vector>

namespace orbitdet {

/// Runs the command-line front end. `args` excludes the program name.
/// Exit codes: 0 success, 1 domain failure (constraint violations, every
/// image failed, no ground truth), 2 usage or parse error.
int run_cli(const std::vector<std::string>& args);

}  // namespace orbitdet
