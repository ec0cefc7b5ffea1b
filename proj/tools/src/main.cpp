#include <iostream>

#include "klish/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return klish::cli::run(args, std::cout, std::cerr);
}
