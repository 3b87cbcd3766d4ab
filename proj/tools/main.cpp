#include "pype_cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return pype::cli::run(std::move(args), std::cout, std::cerr);
}
