#pragma once

#include <iosfwd>

namespace mobiscope::cli {

/// Exit codes: 0 success, 1 validation or module failure, 2 internal error.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace mobiscope::cli
