#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stochmather::cli {

/// Runs the command line `args` (without the program name). Results go to
/// `out` as JSON; failures produce {"error": {...}} on `out` and a nonzero
/// return value. Usage errors are reported on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stochmather::cli
