#pragma once

#include <iosfwd>

namespace fertcast::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Parses arguments and runs one subcommand (evaluate, forecast, validate,
/// synth). Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fertcast::cli
