#include <iostream>

#include "del/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return del::cli::run(args, std::cout, std::cerr);
}
