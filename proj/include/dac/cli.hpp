#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dac {

// Entry point behind the `dac` binary; separated so tests can drive commands
// in-process. `args` excludes the program name. Exit codes: 0 success,
// 1 usage, 2 input parse/validation, 3 numeric/query condition.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dac
