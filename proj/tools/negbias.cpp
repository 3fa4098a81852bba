#include <string>
#include <vector>

#include "negbias/cli.hpp"

int main(int argc, char** argv) {
  return negbias::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
