#pragma once

#include <iosfwd>

namespace gfc::cli {

inline constexpr const char* kVersion = "1.0.0";

// Parses argv and dispatches to the library. Writes results to --out or the
// given output stream, diagnostics to the error stream.
//
// Exit status: 0 success, 1 hypothesis/verification failure (verify with
// pass=false), 2 usage error, 3 numeric/convergence error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gfc::cli
