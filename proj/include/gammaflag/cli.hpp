#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gammaflag::cli {

// Runs the command line. One JSON (or CSV) document goes to out, diagnostics to
// err. Returns 0 only when every check requested by the command passes; 1 for
// failed checks, 2 for usage or input errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gammaflag::cli
