#ifndef MRT_CLI_HPP
#define MRT_CLI_HPP

#include <string>
#include <vector>

namespace mrt {

// Runs one CLI invocation (argv without the program name).  Returns 0 on
// success, 1 on configuration/usage errors, 2 on numerical failures.
int run_cli(const std::vector<std::string>& args);

}  // namespace mrt

#endif  // MRT_CLI_HPP
