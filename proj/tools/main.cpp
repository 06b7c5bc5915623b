#include <iostream>

#include "qlrad/cli.hpp"

int main(int argc, char** argv) {
  return qlrad::cli::run(argc, argv, std::cout, std::cerr);
}
