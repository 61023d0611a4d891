#include <string>
#include <vector>

#include "hlmcf/cli/commands.hpp"

int main(int argc, char** argv) {
  return hlmcf::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
