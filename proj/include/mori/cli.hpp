#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mori::cli {

/// Runs the command line; returns 0 on success, 1 on a failed verification
/// or invariant violation, 2 on an input or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mori::cli
