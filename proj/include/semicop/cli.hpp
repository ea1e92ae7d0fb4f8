#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semicop {

// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace semicop
