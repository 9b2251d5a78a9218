#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "problem.hpp"

namespace aot::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitParseError = 2,
  kExitInvariantViolation = 3,
};

/// Runs one invocation; `args` excludes the program name. Documents go to
/// `out` (or to --output), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Indented key: value rendering with 4 significant digits.
std::string render_human(const Json& doc);

}  // namespace aot::cli
