#pragma once

#include <iosfwd>

namespace traceport::cli {

inline constexpr const char* kVersion = "1.0.0";

// Exit codes: 0 success, 2 invalid input (arguments, files, domains),
// 3 infeasible or degenerate computation.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitComputation = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace traceport::cli
