#include <iostream>
#include <string>
#include <vector>

#include "marvin/gateway.hpp"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return marvin::run_cli(args, std::cout, std::cerr);
}
