#include <iostream>

#include "lsstruct/cli.hpp"

int main(int argc, char** argv) {
  return lsstruct::run_cli(argc, argv, std::cout, std::cerr);
}
