#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace labelstack {

/// Command-line entry point. args excludes the program name.
/// Exit codes: 0 ok, 1 usage, 2 data, 3 invariant violation.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace labelstack
