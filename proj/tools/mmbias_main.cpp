#include <iostream>

#include "mmbias/cli.hpp"

int main(int argc, char** argv) {
  return mmbias::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
