#include <iostream>

#include "qrefine_cli/commands.hpp"

int main(int argc, char** argv) {
  return qrefine::cli::run_cli(argc, argv, std::cout, std::cerr);
}
