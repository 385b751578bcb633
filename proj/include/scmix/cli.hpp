#pragma once

namespace scmix {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

// Entry point of the scmix tool. Never throws; every failure maps to an
// exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace scmix
