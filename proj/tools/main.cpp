#include <string>
#include <vector>

#include "sphere_area/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sphere_area::cli::run(args);
}
