#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hubopt::cli {

enum ExitCode : int {
    kOk = 0,
    kInfeasible = 1,
    kConfigError = 2,
    kInternalError = 3,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hubopt::cli
