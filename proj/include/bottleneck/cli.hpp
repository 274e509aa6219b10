#pragma once

// bottleneck_lab command line: curve, closed-form, oracle, envelope, verify.

#include <ostream>

namespace bottleneck {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitInfeasible = 3;

/// Parses argv and runs one subcommand.  Reports go to `out`, diagnostics to
/// `err`; CSV goes to --output (plus <output>.manifest.json) or to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bottleneck
