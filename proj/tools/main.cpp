#include <string>
#include <vector>

#include "quadtomo/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return quadtomo::cli::run(args);
}
