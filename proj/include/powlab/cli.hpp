#pragma once

#include <string>
#include <vector>

namespace powlab {

/// CLI entry point. Exit codes: 0 success, 1 theorem-grid violation,
/// 2 usage or input error.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace powlab
