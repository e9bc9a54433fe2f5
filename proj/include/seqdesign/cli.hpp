#pragma once

#include <string>
#include <vector>

namespace seqdesign {

// Exit codes: 0 success, 2 usage or validation error, 3 numerical failure
// (non-convergence, grid overflow), 1 failed benchmark criteria.
int run_cli(const std::vector<std::string>& args);

int run_cli(int argc, const char* const* argv);

}  // namespace seqdesign
