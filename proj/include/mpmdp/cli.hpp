#pragma once

namespace mpmdp::cli {

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 = realizable / verification passed / command succeeded,
/// 1 = not realizable / verification failed,
/// 2 = usage, parse, or validation error.
int run(int argc, const char* const* argv);

} // namespace mpmdp::cli
