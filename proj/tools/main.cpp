#include <iostream>
#include <string>
#include <vector>

#include "docconv/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return docconv::run(args, std::cout, std::cerr);
}
