#include <iostream>

#include "traceport/cli.hpp"

int main(int argc, char** argv) {
  return traceport::cli::run(argc, argv, std::cout, std::cerr);
}
