#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geoguide::cli {

/// Runs the command line `args` (without the program name). Returns the exit
/// code: 0 success, 1 computation error, 2 usage or I/O error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geoguide::cli
