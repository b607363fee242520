#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace dynpr::cli {

/// Run the command-line front-end with argv[0] stripped. Returns the process
/// exit code: 0 success, 1 usage or configuration error, 2 input parse error,
/// 3 numeric or convergence failure.
int run(std::vector<std::string> args, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

} // namespace dynpr::cli
