#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slvideo {

// Runs one CLI invocation. args excludes the program name.
// Exit codes: 0 success, 1 domain error, 2 usage error.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slvideo
