#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bcwe::cli {

/// Runs one command line (without the program name). The JSON run report
/// goes to `out`, diagnostics to `err`. Returns 0 on certified success, 2
/// when a verification fails and 1 on usage or input errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bcwe::cli
