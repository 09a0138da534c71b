#pragma once

#include <string>
#include <vector>

namespace pulseprop::cli {

// Exit status: 0 ok, 1 usage/invalid parameters, 2 numerical failure.
int run(const std::vector<std::string>& args);

}  // namespace pulseprop::cli
