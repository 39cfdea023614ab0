#pragma once

namespace gpdyn {

/// Full command-line entry point (subcommands: generate, fit, eval, sweep).
/// Returns the process exit code: 0 success, 1 runtime failure,
/// 2 configuration/contract error, 3 unsupported-model request.
int run_cli(int argc, const char* const* argv);

}  // namespace gpdyn
