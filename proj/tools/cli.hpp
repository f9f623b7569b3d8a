#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thyrotex::cli {

// Runs the command line; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string help_text();

} // namespace thyrotex::cli
