#include <iostream>
#include <string>
#include <vector>

#include "sessionkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sessionkit::cli::run(args, std::cout, std::cerr);
}
