#include <iostream>

#include "dyncover/cli.hpp"

int main(int argc, char** argv) {
  return dyncover::cli::run(argc, argv, std::cout, std::cerr);
}
