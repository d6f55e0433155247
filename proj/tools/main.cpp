#include "dcci/cli.hpp"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  return dcci::parse_and_dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
