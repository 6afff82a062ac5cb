#include <iostream>
#include <string>
#include <vector>

#include "resq/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return resq::cli::run(args, std::cout, std::cerr);
}
