#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace medshift::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitUsage = 64;

/// Runs one `medshift` invocation. args excludes the program name.
/// Results go to `out` (or to --out files); diagnostics and the one-line
/// `error reason=...` record go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace medshift::cli
