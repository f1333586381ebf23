#include <iostream>
#include <string>
#include <vector>

#include "bcwe/cli.hpp"

int main(int argc, char** argv) {
  return bcwe::cli::dispatch(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
