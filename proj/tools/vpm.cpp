#include <iostream>
#include <string>
#include <vector>

#include "vpm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vpm::run_cli(args, std::cout, std::cerr);
}
