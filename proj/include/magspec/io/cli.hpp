#pragma once

#include <iosfwd>

namespace magspec::io {

/// Entry point of the magspec tool: parses the arguments, layers
/// defaults < --config file < command-line flags, and runs the command.
/// Returns the process exit code.
int magspec_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace magspec::io
