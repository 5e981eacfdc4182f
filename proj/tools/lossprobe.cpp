#include <iostream>

#include "lossprobe/cli.hpp"

int main(int argc, char** argv) {
  return lossprobe::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
