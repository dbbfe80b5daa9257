#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ecpe::cli {

/// Runs one of: train, xval, eval, predict, sweep, synth. Returns 0 on
/// success, 2 on usage or configuration errors and 1 on any other failure,
/// with a diagnostic on `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ecpe::cli
