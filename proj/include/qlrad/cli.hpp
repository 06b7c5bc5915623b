#ifndef QLRAD_CLI_HPP
#define QLRAD_CLI_HPP

#include <iosfwd>

namespace qlrad::cli {

// Batch front door. Subcommands: classify, solve, flow, asymptotics,
// picard, single-eq, sweep, figure1. Returns the process exit code:
// 0 success, 2 config error, 3 solver error. Error reports go to `err`
// as one-line JSON objects.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace qlrad::cli

#endif  // QLRAD_CLI_HPP
