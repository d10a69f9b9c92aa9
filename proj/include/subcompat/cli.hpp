#pragma once

#include <iosfwd>

namespace subcompat::cli {

/// Process exit codes.
enum ExitCode : int {
  kCompatible = 0,
  kIncompatible = 1,
  kUndetermined = 2,
  kInputError = 3,
  kInternalError = 4,
};

/// Runs the command line; the JSON report goes to `out`, diagnostics to `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace subcompat::cli
