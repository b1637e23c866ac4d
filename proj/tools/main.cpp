#include <iostream>
#include <string>
#include <vector>

#include "locfair/cli/cli.hpp"

int main(int argc, char** argv) {
  return locfair::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
