#pragma once

namespace sso {

/// CLI entry point. Subcommands: eigen, solve, max-lambda1, min-gap, verify;
/// each takes --config <path> and an optional --out <dir> override.
/// Exit codes: 0 success, 1 malformed config or usage, 2 solver or optimizer
/// non-convergence, 3 I/O failure.
int run(int argc, const char* const* argv);

} // namespace sso
