#pragma once

#include <iosfwd>

namespace fedcvr::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Entry point of the `fedcvr` tool:
///   run      --config <path> [--seed N] [--out <dir>]
///   matrix   --config <path> --out <dir>
///   gen-data --config <path> --out <path>
///   verify
/// Returns 0 on success, 1 on a configuration error, 2 on a runtime failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fedcvr::harness
