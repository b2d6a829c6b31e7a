#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace matlang {

// Entry point shared by the binary and the tests. args excludes argv[0].
// Exit codes: 0 ok, 2 parse/type/dialect, 3 I/O, 4 instance, 5 mismatch.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace matlang
