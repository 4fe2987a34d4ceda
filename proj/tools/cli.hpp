#ifndef GRAPHON_LAB_CLI_HPP
#define GRAPHON_LAB_CLI_HPP

#include <string>
#include <vector>

namespace graphon_lab::cli {

// Entry point behind main(); takes argv-style arguments (without the program
// name). Exit codes: 0 success, 1 domain error, 2 resource/convergence
// error, 64 usage error.
int run(const std::vector<std::string>& args);

}  // namespace graphon_lab::cli

#endif
