#include "pulseprop/cli.hpp"

int main(int argc, char** argv) {
  return pulseprop::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
