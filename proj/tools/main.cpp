#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
  return nttnn::cli::run(std::vector<std::string>(argv, argv + argc));
}
