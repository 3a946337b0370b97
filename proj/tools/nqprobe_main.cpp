#include <iostream>
#include <string>
#include <vector>

#include "nqprobe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nqprobe::dispatch(args, std::cout, std::cerr);
}
