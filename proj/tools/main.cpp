#include <iostream>
#include <string>
#include <vector>

#include "silencer/cli.hpp"

int main(int argc, char** argv) {
  return silencer::cli::dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
