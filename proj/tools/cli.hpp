#pragma once

#include <ostream>

namespace rnndbn::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitNumeric = 3,
};

/// Entry point for `rnndbn <train|generate|eval|gradcheck> ...`. Normal
/// output goes to out, diagnostics to err.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace rnndbn::cli
