#include <iostream>
#include <string>
#include <vector>

#include "zonekit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return zonekit::cli::run(args, std::cout, std::cerr);
}
