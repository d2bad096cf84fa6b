#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace turbohse {

/// Runs one `turbohse` subcommand. args excludes the program name.
/// Returns the process exit code: 0 on success, 1 on a runtime failure,
/// 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace turbohse
