#pragma once

#include <ostream>

namespace gotedit::cli {

// Exit codes: 0 success, 1 runtime failure, 2 bad configuration or arguments.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gotedit::cli
