#include <iostream>
#include <string>
#include <vector>

#include "desplant/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return desplant::run_cli(args, std::cout, std::cerr);
}
