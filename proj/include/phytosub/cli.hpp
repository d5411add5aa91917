#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace phytosub::cli {

// Runs one subcommand. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 endpoint error. Every run writes a JSON report and logs the config hash
// on the error stream.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

int dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace phytosub::cli
