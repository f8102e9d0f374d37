#pragma once

#include <iosfwd>

namespace dmimo::cli {

enum ExitCode : int { ok = 0, config_error = 1, runtime_failure = 2 };

/// Subcommands: sweep, trace, robustness, validate, oracle.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dmimo::cli
