#include <iostream>
#include <string>
#include <vector>

#include "sphwce/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return sphwce::run_command(args, std::cout, std::cerr);
}
