#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace flockmeter::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Subcommands: simulate, constants, coupling, w2rate, stability,
/// telescope, plot. Returns 0 on success, 1 on usage or configuration
/// errors, 2 on numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace flockmeter::cli
