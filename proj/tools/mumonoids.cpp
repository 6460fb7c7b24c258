#include <iostream>
#include <string>
#include <vector>

#include "mumonoids/driver.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mumonoids::run_command(args, std::cout, std::cerr);
}
