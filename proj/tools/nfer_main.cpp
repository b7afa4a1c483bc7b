#include <iostream>
#include <string>
#include <vector>

#include "nfer/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nfer::run_cli(args, std::cout, std::cerr);
}
