#include <iostream>

#include "iwpix/cli.hpp"

int main(int argc, char** argv) {
  return iwpix::cli::main(argc, argv, std::cout, std::cerr);
}
