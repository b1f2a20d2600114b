#pragma once

#include <string>
#include <vector>

namespace gfmsim::cli {

/// Exit codes: 0 success, 2 configuration/usage error, 3 numerical blow-up.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

} // namespace gfmsim::cli
