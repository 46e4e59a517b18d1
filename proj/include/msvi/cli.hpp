#pragma once

#include <iosfwd>

namespace msvi::cli {

enum ExitCode { ok = 0, io_error = 1, config_error = 2, divergence = 3 };

/// Entry point of the msvi command; argv[0] is the program name.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace msvi::cli
