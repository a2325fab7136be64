#include <iostream>
#include <string>
#include <vector>

#include "slvideo/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return slvideo::cli_dispatch(args, std::cout, std::cerr);
}
