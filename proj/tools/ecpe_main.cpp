#include <iostream>
#include <string>
#include <vector>

#include "ecpe/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ecpe::cli::run_command(args, std::cout, std::cerr);
}
