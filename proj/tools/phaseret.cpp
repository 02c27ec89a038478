#include <iostream>
#include <string>
#include <vector>

#include "phaseret/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return phaseret::cli::run_cli(args, std::cout, std::cerr);
}
