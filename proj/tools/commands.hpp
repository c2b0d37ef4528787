#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace phi4::cli {

// args exclude the program name; returns the exit status
// 0 all selected criteria pass, 1 some fail, 2 usage error, 3 numerical failure
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phi4::cli
