#ifndef PYPE_TOOLS_PYPE_CLI_HPP
#define PYPE_TOOLS_PYPE_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace pype::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (args[0] is the program name). Subcommands: grid, mask, simulate,
/// analyze, check. An optional `--config FILE` of key=value lines supplies defaults that
/// explicit flags override.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace pype::cli

#endif  // PYPE_TOOLS_PYPE_CLI_HPP
