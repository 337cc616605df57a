#include <iostream>
#include <string>
#include <vector>

#include "clearing/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return clearing::cli::run(args, std::cout, std::cerr);
}
