#include <iostream>
#include <string>
#include <vector>

#include "dupinlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dupinlab::cli::run_cli(args, std::cout, std::cerr);
}
