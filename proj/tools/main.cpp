#include <iostream>

#include "phytosub/cli.hpp"

int main(int argc, char** argv) {
  return phytosub::cli::dispatch(argc, argv, std::cout, std::cerr);
}
