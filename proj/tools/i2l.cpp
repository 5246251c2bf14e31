#include <string>
#include <vector>

#include "i2l/cli.hpp"

int main(int argc, char** argv) {
  return i2l::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
