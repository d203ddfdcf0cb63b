#pragma once

#include <string>
#include <vector>

namespace isingmix {

/// Command-line driver. Subcommands: fit, simulate, identifiability, gof.
/// Returns 0 on success, 2 on usage errors, 1 on numerical failures. args
/// excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace isingmix
