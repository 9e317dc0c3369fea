#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vpm {

// Entry point of the `vpm` tool. `args` excludes the program name. Returns 0
// on success, 1 on a domain error, 2 on a usage or configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vpm
