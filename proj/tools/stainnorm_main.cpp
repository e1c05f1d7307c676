#include <iostream>

#include "stainnorm/cli.hpp"

int main(int argc, char** argv) {
  return stainnorm::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
