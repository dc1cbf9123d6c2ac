#pragma once

#include <iosfwd>

namespace drsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitInfeasible = 3;

/// Entry point of the `drsim` tool, with streams injectable for tests.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace drsim::cli
