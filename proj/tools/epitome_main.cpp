#include <iostream>

#include "epitome/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return epitome::cli::run(args, std::cout, std::cerr);
}
