#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace penreg::cli {

/// Runs one command line (without the program name). Files go to the --out
/// directory; progress to `out`, warnings and the one-line error to `err`.
/// Returns 0, or 2/3/4 for configuration, data and numeric failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace penreg::cli
