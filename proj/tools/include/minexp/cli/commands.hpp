#pragma once

#include <iosfwd>

#include "minexp/error.hpp"

namespace minexp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitTermCountMismatch = 1,
  kExitInvalidInput = 2,
  kExitNumericalFailure = 3,
  kExitBudgetExceeded = 4,
  kExitMismatch = 5,
};

int exit_code_for(ErrorKind kind);

/// Entry point of the `minexp` tool. Results go to `out`; diagnostics and
/// error records ({"error": <class>, "message": ...}) go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace minexp::cli
