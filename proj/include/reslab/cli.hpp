#pragma once

#include <iosfwd>
#include <string>

namespace reslab {

inline constexpr const char* kToolVersion = "reslab 1.0.0";

enum ExitCode : int { kExitOk = 0, kExitDomain = 2, kExitRegime = 3, kExitUsage = 64, kExitNumerical = 70 };

// Subcommands: resonance, exit-time, table1. Files go to --out (default "out").
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& bytes);

}  // namespace reslab
