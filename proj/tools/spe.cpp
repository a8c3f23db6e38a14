#include <iostream>

#include "spe/cli.hpp"

int main(int argc, char** argv) {
  return spe::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
