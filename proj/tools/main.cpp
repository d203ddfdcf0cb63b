#include "isingmix/cli.hpp"

int main(int argc, char** argv) {
  return isingmix::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
