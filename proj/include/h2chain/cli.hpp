// Command-line entry point: validate, plan, schedule, sweep, report and
// oracle-check subcommands.

#ifndef H2CHAIN_CLI_HPP
#define H2CHAIN_CLI_HPP

#include <iosfwd>

namespace h2chain {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitSolver = 4;

// Runs one subcommand. Results go to `out`, progress lines to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace h2chain

#endif  // H2CHAIN_CLI_HPP
